"""Super-twisting trajectory tracking and distance-only safety control for
differential-drive robots, with a supervisory switcher and a scenario simulator."""

__version__ = "0.1.0"
