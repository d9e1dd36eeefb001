"""Kayıt tabanlı temel (baseline) etiket üretimi"""

from .registration import (
    RegistrationResult,
    SearchSpec,
    SplitSpec,
    alignment_score,
    register,
    split_frame,
)
from .label_generator import LabelGenerator, generate_labels
