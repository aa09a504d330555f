"""HTTP scorer service speaking the stereokg gateway wire protocol."""

__version__ = "0.1.0"
