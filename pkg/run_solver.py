#!/usr/bin/env python3
"""
Startup script for the whiskered torus solver.

    python run_solver.py kam-run --config runs.toml --out runs/eps1e-2
"""
import sys

from cli.main import main

if __name__ == "__main__":
    sys.exit(main())
