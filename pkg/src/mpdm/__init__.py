"""Distribution matching for probabilistic amplitude shaping.

Constant-composition matching (CCDM) by exact multiset-permutation ranking,
pairwise binary-tree multiset-partition matching (MPDM), and AWGN rate
evaluation of shaped ASK/QAM.
"""
from .air import (
    AirReport,
    AskConstellation,
    OptimizerBracketError,
    air_dm,
    air_report,
    awgn_capacity,
    capacity_snr_db,
    fec_rate_threshold,
    i_pas,
    maxwell_boltzmann,
    optimize_mb,
    r_bmd_1d,
    r_bmd_2d,
    shaping_efficiency,
)
from .builder import (
    CompositionPair,
    MpdmCodebook,
    build_codebook,
    count_valid_compositions,
    enumerate_pairs,
    inclusion_exclusion_terms,
    mpdm_decode,
    mpdm_encode,
    rate_loss,
    total_pairwise_permutations,
)
from .ccdm import CcdmCodec, ccdm_decode, ccdm_encode, rank, unrank
from .core import (
    Composition,
    CompositionMismatchError,
    Pmf,
    UnaddressableSequenceError,
    UnknownCompositionError,
    entropy,
    floor_log2,
    multinomial,
    num_compositions,
    quantize_pmf,
    sequence_composition,
)
from .fileio import DataIntegrityError, DescriptorError, load_codebook, save_codebook

__version__ = "0.1.0"
