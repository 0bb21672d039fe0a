"""Interferometric power and discord of two-qubit X states under decoherence."""

from .channels import ChannelFamily, KrausChannel, parse_channel_spec
from .discord import discord
from .dynamics import SuddenChangeEvent, Trajectory, detect_discord_kinks, detect_kinks, evolve
from .ip import ip_bell_diagonal, ip_bruteforce, ip_general, ip_xstate, m_matrix, qfi
from .states import CorrelationMatrix, XState, from_density_matrix, to_density_matrix

__version__ = "0.1.0"

__all__ = [
    "ChannelFamily",
    "CorrelationMatrix",
    "KrausChannel",
    "SuddenChangeEvent",
    "Trajectory",
    "XState",
    "detect_discord_kinks",
    "detect_kinks",
    "discord",
    "evolve",
    "from_density_matrix",
    "ip_bell_diagonal",
    "ip_bruteforce",
    "ip_general",
    "ip_xstate",
    "m_matrix",
    "parse_channel_spec",
    "qfi",
    "to_density_matrix",
]
