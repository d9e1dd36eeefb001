"""
MPRF Kare Formatı
Küçük-endian ikili görüntü/etiket/fark haritası dosyaları

Başlık: magic "MPRF" (4 bayt), version u16 = 1, dtype u8 (0 = f32),
channels u8, height u16, width u16; ardından kanal-öncelikli, satır-öncelikli f32 veri.
"""

import os
from pathlib import Path
from typing import Union

import numpy as np

from errors import MprfFormatError

MPRF_MAGIC = b"MPRF"
MPRF_VERSION = 1
DTYPE_F32 = 0

HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("version", "<u2"),
    ("dtype", "u1"),
    ("channels", "u1"),
    ("height", "<u2"),
    ("width", "<u2"),
])


def encode_frame(array: np.ndarray) -> bytes:
    """(H, W) veya (C, H, W) diziyi MPRF baytlarına çevir"""
    data = np.asarray(array)
    if data.ndim == 2:
        data = data[np.newaxis]
    if data.ndim != 3:
        raise MprfFormatError(f"MPRF 2 veya 3 boyutlu dizi bekler, gelen: {data.shape}")

    channels, height, width = data.shape
    if channels > 255 or height > 65535 or width > 65535:
        raise MprfFormatError(f"MPRF boyut sınırı aşıldı: {data.shape}")
    if not np.all(np.isfinite(data)):
        raise MprfFormatError("MPRF verisi NaN/Inf içeremez")

    header = np.array(
        [(MPRF_MAGIC, MPRF_VERSION, DTYPE_F32, channels, height, width)],
        dtype=HEADER_DTYPE,
    )
    payload = np.ascontiguousarray(data, dtype="<f4")
    return header.tobytes() + payload.tobytes()


def decode_frame(raw: bytes, source: str = "<bytes>") -> np.ndarray:
    """MPRF baytlarını (C, H, W) float32 diziye çevir"""
    if len(raw) < HEADER_DTYPE.itemsize:
        raise MprfFormatError(f"{source}: başlık eksik ({len(raw)} bayt)")

    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    if header["magic"] != MPRF_MAGIC:
        raise MprfFormatError(f"{source}: geçersiz magic {header['magic']!r}")
    if header["version"] != MPRF_VERSION:
        raise MprfFormatError(f"{source}: desteklenmeyen sürüm {header['version']}")
    if header["dtype"] != DTYPE_F32:
        raise MprfFormatError(f"{source}: desteklenmeyen dtype kodu {header['dtype']}")

    shape = (int(header["channels"]), int(header["height"]), int(header["width"]))
    expected = HEADER_DTYPE.itemsize + int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise MprfFormatError(f"{source}: boyut {len(raw)} bayt, beklenen {expected}")

    data = np.frombuffer(raw, dtype="<f4", offset=HEADER_DTYPE.itemsize)
    return data.reshape(shape).astype(np.float32)


def write_frame(path: Union[str, Path], array: np.ndarray) -> None:
    """Dosyayı geçici isimle yazıp yerine taşı (yarım dosya bırakmaz)"""
    path = Path(path)
    raw = encode_frame(array)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "wb") as f:
            f.write(raw)
        os.replace(tmp, path)
    except OSError as e:
        raise MprfFormatError(f"{path}: yazılamadı ({e})") from e


def read_frame(path: Union[str, Path]) -> np.ndarray:
    """MPRF dosyasını (C, H, W) olarak oku"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise MprfFormatError(f"{path}: okunamadı ({e})") from e
    return decode_frame(raw, source=str(path))


def read_image(path: Union[str, Path]) -> np.ndarray:
    """Tek kanallı MPRF dosyasını (H, W) olarak oku"""
    frame = read_frame(path)
    if frame.shape[0] != 1:
        raise MprfFormatError(f"{path}: tek kanal bekleniyordu, {frame.shape[0]} bulundu")
    return frame[0]
