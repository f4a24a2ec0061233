"""
Multiuser MIMO downlink with imperfect channel state information.

Zero-forcing beamforming rates under analog, RVQ and QAM-coded feedback,
with trained receiver CSI and temporally correlated fading.
"""
__version__ = '0.1.0'

from .bounds import BoundCurve, evaluate_bound
from .channel import (BeamformerSet, ChannelRealization, per_user_sinr_terms,
                      sample_iid_channel, zf_beamformer)
from .errors import (DegenerateChannelError, DomainError, QuadratureError,
                     ResourceError)
from .fading import AR1, IIDBlock, Jakes, filtering_mmse, prediction_mmse
from .feedback import (Analog, DigitalQAM, DigitalRVQ, Perfect, PerfectCsir,
                       TrainedCsir)
from .montecarlo import RateCurve, ScenarioConfig, fit_prelog, run_scenario

__all__ = ['AR1', 'Analog', 'BeamformerSet', 'BoundCurve', 'ChannelRealization',
           'DegenerateChannelError', 'DigitalQAM', 'DigitalRVQ', 'DomainError',
           'IIDBlock', 'Jakes', 'Perfect', 'PerfectCsir', 'QuadratureError',
           'RateCurve', 'ResourceError', 'ScenarioConfig', 'TrainedCsir',
           'evaluate_bound', 'filtering_mmse', 'fit_prelog',
           'per_user_sinr_terms', 'prediction_mmse', 'run_scenario',
           'sample_iid_channel', 'zf_beamformer', '__version__']
