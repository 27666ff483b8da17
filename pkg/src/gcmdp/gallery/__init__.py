"""Built-in example models and the random GC model generator."""
