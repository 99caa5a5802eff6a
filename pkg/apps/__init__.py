"""
Apps - Application Entry Points

This package contains runnable applications that use the src/ and lib/ modules.

Available apps:
- pushrec.py: Command line for ingest, smooth, simulate, analyze, synth and plot
"""
