"""Weak-measurement realism and weak quantum discord on two-qubit (Werner) states."""
from .channels import (KrausChannel, TimeSchedule, apply_channel, channel_from_schedule, depolarizing_channel,
                       monitoring, monitoring_as_dephasing, monitoring_schedule, phi_map, werner_schedule)
from .density import (Subsystem, eig_hermitian, fidelity, mutual_information, partial_trace, relative_entropy,
                      tensor, von_neumann_entropy)
from .quantifiers import (delta_realism, discord, irrealism, quantify, realism, weak_discord,
                          weak_discord_unminimized, werner_delta_realism_closed_form, werner_monitored_eigenvalues)
from .states import COMPUTATIONAL, BellLabel, ObservableBasis, bell_state, werner_state

__version__ = "0.1.0"

__all__ = [
    "KrausChannel",
    "TimeSchedule",
    "apply_channel",
    "channel_from_schedule",
    "depolarizing_channel",
    "monitoring",
    "monitoring_as_dephasing",
    "monitoring_schedule",
    "phi_map",
    "werner_schedule",
    "Subsystem",
    "eig_hermitian",
    "fidelity",
    "mutual_information",
    "partial_trace",
    "relative_entropy",
    "tensor",
    "von_neumann_entropy",
    "delta_realism",
    "discord",
    "irrealism",
    "quantify",
    "realism",
    "weak_discord",
    "weak_discord_unminimized",
    "werner_delta_realism_closed_form",
    "werner_monitored_eigenvalues",
    "COMPUTATIONAL",
    "BellLabel",
    "ObservableBasis",
    "bell_state",
    "werner_state",
]
