"""Run harness: config files, sweeps, result emission, service, CLI."""
