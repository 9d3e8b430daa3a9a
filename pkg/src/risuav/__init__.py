"""Trajectory planning for a UAV-mounted reconfigurable intelligent surface relay."""

__version__ = "0.1.0"
