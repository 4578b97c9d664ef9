"""Tunneling times from the two-channel wave-packet picture of 1D scattering."""

from .channels import (Channel, ChannelReport, DelayTimes, MonteCarloSort, ScatteringWindow,
                       TransitTimes, channel_phases, channel_reports, decompose_incident,
                       delay_times, montecarlo_sort, scattering_window, swpa_times, transit_times)
from .core import (HALF_QUANTUM, HBAR, DomainError, KGrid, QuadratureError, ResolutionError,
                   UnitSystem, differentiate, energy_from_k, integrate, k_from_energy)
from .packets import (ChannelEmpty, JointMoments, MomentReport, PacketKind, PacketSpec, Shape,
                      gaussian_closed_forms, joint_distance, joint_moments, joint_variance,
                      k_moment, k_sample, mean_x, moments, norms, register_shape, var_x)
from .potential import PotentialProfile, delta_like, invert, midpoint, rectangular
from .scatter import (ScatteringData, derivative_set, rect_phase_derivative, transfer_matrix,
                      transmission, tunneling_params)

__version__ = "0.1.0"
