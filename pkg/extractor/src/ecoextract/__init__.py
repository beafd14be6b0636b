"""Feature extraction sidecar: definition texts and images -> engine feature files."""

__version__ = "0.1.0"
