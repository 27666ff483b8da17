"""
gcmdp - Value iteration and convergence diagnostics for total-cost MDPs.

This library solves finite and lazily generated Markov decision processes under
the general convergence condition: the expected total of the negative cost
parts is finite under every policy. It provides the dynamic programming
operators, value iteration from zero, from above and in its increasing form,
checkers for partial convergence of value iteration, and constructions of
epsilon-optimal and optimal policies.
"""

__version__ = "0.1.0"
