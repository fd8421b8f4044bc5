"""
Access to the BEAMFORMING settings dict with built-in fallbacks.
"""

from django.conf import settings

DEFAULTS = {
    'DEFAULT_POWER': 10.0,
    'NOISE_POWER': 1.0,
    'EPSILON': 1e-3,
    'SDP_TOL': 1e-6,
    'SDP_MAX_OUTER': 40,
    'MARY_NODE_CAP': 10**7,
    'SBB_NODE_BUDGET': 10**5,
    'SBB_WARM_STARTS': 8,
    'AO_MAX_SWEEPS': 100,
    'AO_REL_TOL': 1e-8,
    'AO_RESTARTS': 8,
    'AO_GRID_POINTS': 64,
    'ORACLE_SPACE_LIMIT': 2**24,
    'WORKERS': 0,
}


def beam_setting(name):
    """Return a solver setting, preferring settings.BEAMFORMING over DEFAULTS."""
    configured = getattr(settings, 'BEAMFORMING', None) or {}
    if name in configured:
        return configured[name]
    if name not in DEFAULTS:
        raise KeyError(f"Unknown beamforming setting: {name}")
    return DEFAULTS[name]
