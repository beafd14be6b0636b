"""Knowledge-graph + multimodal recommender engine for regional development patterns."""

__version__ = "0.1.0"
