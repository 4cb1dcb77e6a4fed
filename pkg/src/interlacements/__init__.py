"""Random interlacements on finite killed weighted graphs with exact exterior collapse."""

from .graph import (ExhaustionFamily, ExhaustionLevel, GraphError, KilledWeightedGraph, build_graph,
                    dumps_graph, loads_graph, make_biased_z, make_exhaustion, make_lattice_box,
                    make_regular_tree, read_graph, write_graph)
from .potential import (EquilibriumProfile, HingeMeasure, capacity, consistency_pushforward,
                        equilibrium, flow_energy, harmonic_flow, hinge, hitting,
                        last_exit_distribution, restricted_equilibrium)
from .sampler import (LabeledTrajectory, RngStream, WindowSample, extend_window, restrict_window,
                      sample_hinge_process, sample_levels, sample_window)
from .coupling import DiscreteDistribution, optimal_coupling, poisson_shift_tv, ppp_gap, ppp_tv_upper, tv
from .criteria import CriterionTrace, atom_flow, cap_identity, strong_criterion, weak_criterion
from .harness import StatReport, fkg_test, vacancy_test

__version__ = "0.1.0"
