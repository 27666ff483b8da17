"""Value iteration drivers, policy evaluation and policy constructions."""
