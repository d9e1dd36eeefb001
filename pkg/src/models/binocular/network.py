"""
Binocular Ağı
Sol/sağ dalga boyu kolları, toplama/çıkarma birleşimli etkileşim kolu,
dört yığılmış WDM segmenti ve iki işlem birimli çıkış başlığı
"""

from typing import Optional, Tuple

import torch
import torch.nn as nn
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from errors import ShapeError
from models.autodiff.ops import add, concat_channels, conv2d, dropout, ensure_finite, sub
from models.binocular.wdm import WdmConfig, WideDeepModule, init_bias, init_kernel

DTYPES = {"float32": torch.float32, "float64": torch.float64}


class BinocularConfig(BaseModel):
    """Ağ mimarisi ayarları (masaüstü ölçeği varsayılan)"""

    model_config = ConfigDict(frozen=True)

    input_shape: Tuple[int, int] = (32, 32)  # H × W
    segment_count: int = Field(default=4, ge=1)
    head_units: int = Field(default=2, ge=0)
    base_width: int = Field(default=8, ge=1)
    dropout_p: float = Field(default=0.2, ge=0.0, lt=1.0)
    aux_head: bool = False
    dtype: str = "float32"

    @field_validator("input_shape")
    @classmethod
    def _positive_shape(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        if v[0] < 1 or v[1] < 1:
            raise ValueError(f"input_shape pozitif olmalı: {v}")
        return v

    @field_validator("dtype")
    @classmethod
    def _known_dtype(cls, v: str) -> str:
        if v not in DTYPES:
            raise ValueError(f"dtype {sorted(DTYPES)} içinden olmalı: {v}")
        return v

    @property
    def side_width(self) -> int:
        """Sol/sağ kol kanal sayısı"""
        return self.base_width

    @property
    def interaction_width(self) -> int:
        """Etkileşim kolu kanal sayısı"""
        return 2 * self.base_width

    def wdm(self, in_channels: int, out_channels: int) -> WdmConfig:
        branch = max(1, self.base_width // 2)
        return WdmConfig(
            in_channels=in_channels,
            out_channels=out_channels,
            branch_widths=(branch, branch, branch, branch),
        )


class BinocularNet(nn.Module):
    """
    Binocular ağı.

    Segment k için:
        L_k = WDM(L_{k−1}), R_k = WDM(R_{k−1})
        I_k = WDM(concat(I_{k−1}, L_k, R_k, L_k+R_k, L_k−R_k)) + proj(I_{k−1})
    I_0 = concat(ch1, ch2, ch1+ch2, ch1−ch2). Başlık: head_units WDM + 1×1 doğrusal evrişim.
    """

    def __init__(self, cfg: BinocularConfig, seed: int = 0):
        super().__init__()
        self.cfg = cfg
        g = torch.Generator().manual_seed(int(seed))
        ws, wi = cfg.side_width, cfg.interaction_width

        self.left = nn.ModuleList()
        self.right = nn.ModuleList()
        self.interaction = nn.ModuleList()
        self.skip_weights = nn.ParameterList()
        self.skip_biases = nn.ParameterList()

        prev_side, prev_inter = 1, 4
        for _ in range(cfg.segment_count):
            self.left.append(WideDeepModule(cfg.wdm(prev_side, ws), g))
            self.right.append(WideDeepModule(cfg.wdm(prev_side, ws), g))
            self.interaction.append(WideDeepModule(cfg.wdm(prev_inter + 4 * ws, wi), g))
            self.skip_weights.append(init_kernel(wi, prev_inter, 1, g))
            self.skip_biases.append(init_bias(wi))
            prev_side, prev_inter = ws, wi

        self.head = nn.ModuleList(
            WideDeepModule(cfg.wdm(wi, wi), g) for _ in range(cfg.head_units)
        )
        self.out_weight = nn.Parameter(torch.randn(1, wi, 1, 1, generator=g) * (1.0 / wi) ** 0.5)
        self.out_bias = init_bias(1)

        if cfg.aux_head:
            self.aux_weight = nn.Parameter(torch.randn(1, wi, 1, 1, generator=g) * (1.0 / wi) ** 0.5)
            self.aux_bias = init_bias(1)

        self.to(DTYPES[cfg.dtype])
        # Dropout maskeleri için ayrı üreteç; eğitici epoch başına yeniden tohumlar
        self.dropout_generator = torch.Generator().manual_seed(int(seed) + 1)

    @property
    def dtype(self) -> torch.dtype:
        return DTYPES[self.cfg.dtype]

    def _drop(self, x: torch.Tensor, training: bool) -> torch.Tensor:
        return dropout(x, self.cfg.dropout_p, training, self.dropout_generator)

    def forward_with_aux(
        self, batch: torch.Tensor, training: bool = False
    ) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
        """(normalize sıcaklık haritası, yardımcı oran haritası veya None)"""
        if batch.dim() != 4 or batch.shape[1] != 2:
            raise ShapeError(f"Binocular girdisi N×2×H×W olmalı, gelen: {tuple(batch.shape)}")
        if tuple(batch.shape[2:]) != tuple(self.cfg.input_shape):
            raise ShapeError(
                f"Girdi uzamsal boyutu {tuple(batch.shape[2:])} != yapılandırma {self.cfg.input_shape}"
            )
        batch = ensure_finite(batch.to(self.dtype), "binocular girdisi")

        ch1, ch2 = batch[:, 0:1], batch[:, 1:2]
        left, right = ch1, ch2
        inter = concat_channels([ch1, ch2, add(ch1, ch2), sub(ch1, ch2)])

        for k in range(self.cfg.segment_count):
            left = self._drop(self.left[k](left), training)
            right = self._drop(self.right[k](right), training)
            merged = concat_channels([inter, left, right, add(left, right), sub(left, right)])
            skip = conv2d(inter, self.skip_weights[k], self.skip_biases[k])
            inter = add(self._drop(self.interaction[k](merged), training), skip)

        aux = None
        if self.cfg.aux_head:
            aux = conv2d(inter, self.aux_weight, self.aux_bias)

        x = inter
        for unit in self.head:
            x = self._drop(unit(x), training)
        out = conv2d(x, self.out_weight, self.out_bias)
        return ensure_finite(out, "binocular çıktısı"), aux

    def forward(self, batch: torch.Tensor, training: bool = False) -> torch.Tensor:
        out, _ = self.forward_with_aux(batch, training)
        return out


def build_binocular(cfg: Optional[BinocularConfig] = None, seed: int = 0) -> BinocularNet:
    """Yapılandırmadan ağı kur ve parametre sayısını raporla"""
    cfg = cfg or BinocularConfig()
    net = BinocularNet(cfg, seed=seed)
    logger.info(
        f"Binocular ağı kuruldu: {cfg.input_shape[0]}×{cfg.input_shape[1]}, "
        f"genişlik {cfg.base_width}, {cfg.segment_count} segment, "
        f"{parameter_count(net)} parametre"
    )
    return net


def forward(net: BinocularNet, batch: torch.Tensor, training: bool = False) -> torch.Tensor:
    """N×2×H×W → N×1×H×W normalize sıcaklık haritası"""
    return net(batch, training=training)


def parameter_count(net: nn.Module) -> int:
    return sum(p.numel() for p in net.parameters())
