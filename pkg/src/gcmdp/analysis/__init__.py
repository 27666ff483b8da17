"""Graph analysis of MDPs: strongly connected and end components, GC checks."""
