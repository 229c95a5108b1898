"""Road condition and pothole classification from smartphone IMU/GPS logs."""

__version__ = "0.1.0"
