"""Place road names along the roads of a map so that as many road sections as possible carry a label.

Input lines are turned into a planar road graph (``preprocess``), labels are
chosen by one of several solvers (``solvers``, ``dnc``) and the result is
drawn as SVG (``render``).
"""

__version__ = "0.1.0"
