"""
Wide Deep Module (WDM)
Dört kollu Inception bloğu + kanal sıkıştıran 3×3 evrişim
"""

import math
from typing import Optional, Tuple

import torch
import torch.nn as nn
from pydantic import BaseModel, ConfigDict, field_validator

from models.autodiff.ops import concat_channels, conv2d, maxpool2d, relu


class WdmConfig(BaseModel):
    """WDM kanal genişlikleri"""

    model_config = ConfigDict(frozen=True)

    in_channels: int
    out_channels: int
    branch_widths: Tuple[int, int, int, int] = (4, 4, 4, 4)  # 1×1, 3×3, 5×5, havuz

    @field_validator("in_channels", "out_channels")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"kanal sayısı pozitif olmalı: {v}")
        return v

    @field_validator("branch_widths")
    @classmethod
    def _positive_widths(cls, v: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
        if any(w < 1 for w in v):
            raise ValueError(f"kol genişlikleri pozitif olmalı: {v}")
        return v

    @property
    def concat_channels(self) -> int:
        return sum(self.branch_widths)


def init_kernel(out_c: int, in_c: int, k: int, generator: torch.Generator) -> nn.Parameter:
    # He başlatması (ReLU)
    std = math.sqrt(2.0 / (in_c * k * k))
    return nn.Parameter(torch.randn(out_c, in_c, k, k, generator=generator) * std)


def init_bias(n: int) -> nn.Parameter:
    return nn.Parameter(torch.zeros(n))


class WideDeepModule(nn.Module):
    """
    Kollar:
        a) 1×1
        b) 1×1 → 3×3
        c) 1×1 → 5×5
        d) 3×3 maks. havuz → 1×1
    Her kol ReLU ile biter; kollar kanal ekseninde birleştirilir ve 3×3
    evrişim + ReLU ile out_channels'a sıkıştırılır.
    """

    def __init__(self, cfg: WdmConfig, generator: Optional[torch.Generator] = None):
        super().__init__()
        g = generator or torch.Generator().manual_seed(0)
        c_in = cfg.in_channels
        wa, wb, wc, wd = cfg.branch_widths
        self.cfg = cfg

        self.a_weight, self.a_bias = init_kernel(wa, c_in, 1, g), init_bias(wa)
        self.b_reduce_weight, self.b_reduce_bias = init_kernel(wb, c_in, 1, g), init_bias(wb)
        self.b_weight, self.b_bias = init_kernel(wb, wb, 3, g), init_bias(wb)
        self.c_reduce_weight, self.c_reduce_bias = init_kernel(wc, c_in, 1, g), init_bias(wc)
        self.c_weight, self.c_bias = init_kernel(wc, wc, 5, g), init_bias(wc)
        self.d_weight, self.d_bias = init_kernel(wd, c_in, 1, g), init_bias(wd)
        self.compress_weight = init_kernel(cfg.out_channels, cfg.concat_channels, 3, g)
        self.compress_bias = init_bias(cfg.out_channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        a = relu(conv2d(x, self.a_weight, self.a_bias))

        b = relu(conv2d(x, self.b_reduce_weight, self.b_reduce_bias))
        b = relu(conv2d(b, self.b_weight, self.b_bias))

        c = relu(conv2d(x, self.c_reduce_weight, self.c_reduce_bias))
        c = relu(conv2d(c, self.c_weight, self.c_bias))

        d = relu(conv2d(maxpool2d(x, window=3, stride=1), self.d_weight, self.d_bias))

        merged = concat_channels([a, b, c, d])
        return relu(conv2d(merged, self.compress_weight, self.compress_bias))


def build_wdm(cfg: WdmConfig, generator: Optional[torch.Generator] = None) -> WideDeepModule:
    """Yapılandırmadan WDM alt grafı kur"""
    return WideDeepModule(cfg, generator)
