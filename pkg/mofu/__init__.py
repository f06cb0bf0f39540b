"""
mofu: kinematics, motion scripts and simulation of the MOFU expanding
robot, a Jitterbug-linkage body on a differential two-wheel drive.
"""

__version__ = "0.1.0"
