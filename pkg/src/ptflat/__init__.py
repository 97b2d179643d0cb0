"""Flat-band physics of a PT-symmetric cross-stitch ladder with synthetic flux.

Three sites per cell (gain on A, passive B, loss on C); the A-C bond carries
the flux phase.
"""
from .analysis import (BandLocation, DegeneracyPoint, PhaseClassification, PointOrder,
                       classify_phase, critical_gamma, diabolic_points, discriminant, find_eps,
                       threshold_gamma)
from .bands import (BandStructure, FlatBand, band_structure, bloch_roots, characteristic_cubic,
                    flat_band_params, pt_dimer_spectrum)
from .cls import (Side, StateVector, Variant, edge_mode, flat_band_superposition, inner_cls,
                  make_phi, make_varphi, pt_partner, verify_eigenstate, zero_mode_basis)
from .cubic import solve_cubic, solve_cubic_batch
from .dynamics import Trajectory, evolve, propagate_by_eigenbasis
from .errors import (ConvergenceError, IllConditionedError, NumericalError, OffManifoldError,
                     OutOfDomainError, ParameterError, PtflatError)
from .lattice import RealSpaceHamiltonian, build_hamiltonian, real_space_chiral, real_space_parity
from .model import Boundary, LatticeParams, bloch_hamiltonian
from .spectral import EigenDecomposition, eigendecompose

__version__ = "0.1.0"
