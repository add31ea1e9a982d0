"""DNS DoS detection testbed: traffic simulation, windowed features, classifiers."""

__version__ = "0.1.0"
