"""
Whiskered Torus Solver

Spectral computation of whiskered quasi-periodic tori of the Boussinesq
equation and the Boussinesq system.

Key Components:
- fourier: Coefficient tables on the torus, calculus and analytic norms
- models: The PDE models and their linear analysis
- lindstedt: Approximate tori from the Lindstedt recursion
- hyperbolic: Invariant splitting and solves on the stable/unstable bundles
- center: Small divisors, the reducibility frame and the center solve
- newton: Quasi-Newton iteration, a-posteriori ledger, phase alignment
- workflows, cli: Stages and the command-line front end

Usage:
    python run_solver.py kam-run --out runs/demo

For more information, see README.md
"""

__version__ = "1.0.0"
__author__ = "Torus Solver Team"
