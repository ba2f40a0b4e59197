"""
Hexgas-Lattice unit tests
=========================

Fast checks on small lattices, one file per module:
- test_lattice.py: directions, neighbours, bit packing
- test_dynamics.py: collision table, chirality stream, stepping
- test_boundary.py: bounce-back, walls, PBM masks
- test_observables.py: coarse-graining and theory formulas
- test_scenarios.py / test_config.py: initial states and configuration
- test_frames.py / test_engine.py / test_cli.py: output and the run driver
- test_probes.py / test_verify.py: measurement probes and the invariant suite
"""
