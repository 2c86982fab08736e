"""Stationary analysis of two asymmetric queues under Shortest-Queue-First.

The analytic pipeline lives in :mod:`sqfpair.params` (kernels, algebraic
branches, characteristic constants), :mod:`sqfpair.cubics` (chord-parameter
cubics and their real geometry), :mod:`sqfpair.iteration` (the two height
maps and the per-slice matrices of the vector functional equation),
:mod:`sqfpair.series` (the semi-group series solution, boundary densities,
transforms and empty-queue probabilities) and :mod:`sqfpair.asymptotics`
(regime classification, residues, tail estimates). :mod:`sqfpair.sim` is an
independent workload-level discrete-event simulator used as a statistical
oracle for every probabilistic output, and :mod:`sqfpair.cli` is the
command-line front end.
"""

__version__ = "0.1.0"
