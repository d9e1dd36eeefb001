"""
Benzerlik Dönüşümü Yardımcıları
Kanal hizasızlığı, kayıt ve veri artırma için ortak çarpıtma (warp) fonksiyonları

Konvansiyon: x' = s·R(θ)(x − c) + c + (dx, dy); x = (sütun, satır), c = görüntü merkezi.
"""

from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np
from skimage.transform import SimilarityTransform, warp


@dataclass(frozen=True)
class MisalignmentParams:
    """Kanal 2'nin kanal 1'e göre benzerlik dönüşümü"""
    rotation_deg: float = 0.0
    scale: float = 1.0
    dx: float = 0.0  # piksel, sütun yönü
    dy: float = 0.0  # piksel, satır yönü

    @property
    def shift(self) -> Tuple[float, float]:
        return (self.dx, self.dy)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MisalignmentParams":
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def identity(cls) -> "MisalignmentParams":
        return cls()


def similarity_transform(params: MisalignmentParams, shape: Tuple[int, int]) -> SimilarityTransform:
    """Görüntü merkezi etrafında dönüşüm matrisini kur"""
    rows, cols = shape
    cx, cy = (cols - 1) / 2.0, (rows - 1) / 2.0
    theta = np.deg2rad(params.rotation_deg)
    cos_t, sin_t = params.scale * np.cos(theta), params.scale * np.sin(theta)

    matrix = np.array([
        [cos_t, -sin_t, cx + params.dx - (cos_t * cx - sin_t * cy)],
        [sin_t, cos_t, cy + params.dy - (sin_t * cx + cos_t * cy)],
        [0.0, 0.0, 1.0],
    ])
    return SimilarityTransform(matrix=matrix)


def warp_similarity(
    image: np.ndarray,
    params: MisalignmentParams,
    cval: float = 0.0,
    order: int = 1,
) -> np.ndarray:
    """İleri çarpıtma: çıktı(x') = girdi(T⁻¹x'), sabit dolgu (order=1 bilineer, 3 kübik)"""
    tform = similarity_transform(params, image.shape)
    return warp(
        np.asarray(image, dtype=np.float64),
        tform.inverse,
        order=order,
        mode="constant",
        cval=cval,
        preserve_range=True,
    )


def unwarp_similarity(
    image: np.ndarray,
    params: MisalignmentParams,
    cval: float = 0.0,
    order: int = 1,
) -> np.ndarray:
    """Ters çarpıtma: warp_similarity ile uygulanmış dönüşümü geri al"""
    tform = similarity_transform(params, image.shape)
    return warp(
        np.asarray(image, dtype=np.float64),
        tform,
        order=order,
        mode="constant",
        cval=cval,
        preserve_range=True,
    )


def source_coordinates(params: MisalignmentParams, shape: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """Çarpıtılmış ızgaradaki her pikselin kaynak konumu T⁻¹x' (satır, sütun)"""
    rows, cols = shape
    r, c = np.mgrid[0:rows, 0:cols].astype(np.float64)
    xy = similarity_transform(params, shape).inverse(np.column_stack([c.ravel(), r.ravel()]))
    return xy[:, 1].reshape(shape), xy[:, 0].reshape(shape)
