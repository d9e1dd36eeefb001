"""
BNCK Kontrol Noktası Formatı
magic "BNCK", version u16 LE, parametre sayısı u32; her parametre için
isim uzunluğu u16 + UTF-8 isim, rank u8, her boyut u32, ham f32 LE veri
"""

import os
import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np
import torch
from loguru import logger

from errors import MprfFormatError

BNCK_MAGIC = b"BNCK"
BNCK_VERSION = 1


def encode_checkpoint(params: Mapping[str, torch.Tensor]) -> bytes:
    """İsimli parametreleri BNCK baytlarına çevir (isim sırası korunur)"""
    chunks = [BNCK_MAGIC, struct.pack("<HI", BNCK_VERSION, len(params))]
    for name, tensor in params.items():
        encoded = name.encode("utf-8")
        array = tensor.detach().cpu().numpy()
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<B", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_checkpoint(raw: bytes, source: str = "<bytes>") -> Dict[str, np.ndarray]:
    """BNCK baytlarını isim -> float32 dizi sözlüğüne çevir"""
    if raw[:4] != BNCK_MAGIC:
        raise MprfFormatError(f"{source}: geçersiz BNCK magic {raw[:4]!r}")
    try:
        version, count = struct.unpack_from("<HI", raw, 4)
        if version != BNCK_VERSION:
            raise MprfFormatError(f"{source}: desteklenmeyen BNCK sürümü {version}")

        pos = 10
        out: Dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", raw, pos)
            pos += 2
            name = raw[pos:pos + name_len].decode("utf-8")
            pos += name_len
            (rank,) = struct.unpack_from("<B", raw, pos)
            pos += 1
            shape = struct.unpack_from(f"<{rank}I", raw, pos)
            pos += 4 * rank
            n = int(np.prod(shape)) if rank else 1
            out[name] = np.frombuffer(raw, dtype="<f4", count=n, offset=pos).reshape(shape).copy()
            pos += 4 * n
    except (struct.error, ValueError, UnicodeDecodeError) as e:
        raise MprfFormatError(f"{source}: bozuk BNCK dosyası ({e})") from e

    if pos != len(raw):
        raise MprfFormatError(f"{source}: BNCK sonunda {len(raw) - pos} fazla bayt")
    return out


def save_checkpoint(module: torch.nn.Module, path: Union[str, Path]) -> None:
    """Modül parametrelerini BNCK olarak kaydet"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(encode_checkpoint(dict(module.named_parameters())))
    os.replace(tmp, path)
    logger.info(f"Kontrol noktası kaydedildi: {path}")


@torch.no_grad()
def load_checkpoint(module: torch.nn.Module, path: Union[str, Path]) -> None:
    """BNCK dosyasını modül parametrelerine yükle (isim ve boyut birebir eşleşmeli)"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise MprfFormatError(f"{path}: okunamadı ({e})") from e

    arrays = decode_checkpoint(raw, source=str(path))
    params = dict(module.named_parameters())
    if set(arrays) != set(params):
        missing = sorted(set(params) - set(arrays))
        extra = sorted(set(arrays) - set(params))
        raise MprfFormatError(f"{path}: parametre isimleri uyuşmuyor (eksik={missing}, fazla={extra})")

    for name, param in params.items():
        array = arrays[name]
        if tuple(array.shape) != tuple(param.shape):
            raise MprfFormatError(
                f"{path}: {name} boyutu {array.shape} != model {tuple(param.shape)}"
            )
        param.copy_(torch.from_numpy(array).to(param.dtype))
    logger.info(f"Kontrol noktası yüklendi: {path}")
