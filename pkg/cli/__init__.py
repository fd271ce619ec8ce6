"""csp-refuter command line entry point."""
