"""Tree-structured threaded algebraic space-time codes.

Encoders with upper-triangular equivalent matrices, structure-aware Givens
QR with flop accounting, tree-search decoders, brute-force diversity
certification, and a Monte Carlo experiment CLI.
"""

from .algebra import (Constellation, DiophantineParams, GoldenParams,
                      default_diophantine, golden_generator, make_constellation)
from .channel import (sample_channel, snr_to_noise_var, transmit, trial_rng)
from .decoders import (DecoderReport, DetectionProblem, babai_decode,
                       fano_decode, ml_exhaustive, sphere_decode)
from .encoder import (CodeParams, Codeword, EquivCodeMatrix, ORIGINAL, TREE,
                      code_rate, encode, encode_constituent, encode_original,
                      encode_tail_cut, encode_tree_tast, equivalent_matrix,
                      make_code_params, symbol_schedule)
from .errors import (EncodeError, InvalidConstellation, InvalidInput, Refused,
                     ShapeError, TreeTastError)
from .qr import QRResult, dense_qr, givens_qr, predicted_flops
from .verify import (DiversityCertificate, check_triangular,
                     min_det_over_differences, min_rank_over_differences,
                     thread_submatrix_rank)

__version__ = "1.0.0"

__all__ = [
    "CodeParams", "Codeword", "Constellation", "DecoderReport",
    "DetectionProblem", "DiophantineParams", "DiversityCertificate",
    "EncodeError", "EquivCodeMatrix", "GoldenParams", "InvalidConstellation",
    "InvalidInput", "ORIGINAL", "QRResult", "Refused", "ShapeError", "TREE",
    "TreeTastError", "babai_decode", "check_triangular", "code_rate",
    "default_diophantine", "dense_qr", "encode", "encode_constituent",
    "encode_original", "encode_tail_cut", "encode_tree_tast",
    "equivalent_matrix", "fano_decode", "givens_qr", "golden_generator",
    "make_code_params", "make_constellation", "min_det_over_differences",
    "min_rank_over_differences", "ml_exhaustive", "predicted_flops",
    "sample_channel", "snr_to_noise_var", "sphere_decode", "symbol_schedule",
    "thread_submatrix_rank", "transmit", "trial_rng",
]
