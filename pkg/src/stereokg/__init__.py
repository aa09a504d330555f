"""stereokg: data-driven construction and analysis of a cultural-knowledge
and stereotype knowledge graph from social media text dumps."""

__version__ = "0.1.0"
