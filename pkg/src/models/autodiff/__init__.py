"""Denetimli tensör işlemleri, ADAM ve BNCK kontrol noktaları"""

from .ops import (
    activation_patterns,
    add,
    concat_channels,
    conv2d,
    dropout,
    ensure_finite,
    maxpool2d,
    mse_loss,
    relu,
    sub,
)
from .optim import AdamState, adam_step
from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, max_relative_error
