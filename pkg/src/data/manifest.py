"""
Veri Seti Referans Tablosu
Kare/etiket dosya adreslerini ve bölme etiketlerini JSON-lines olarak tutar
"""

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional

from loguru import logger

from data.geometry import MisalignmentParams
from errors import MissingArtifactError

SPLITS = ("train", "test")
LABEL_STATUSES = ("pending", "success", "failed")


@dataclass(frozen=True)
class ManifestRecord:
    """Tek kare kaydı (yollar mutlak tutulur, diske göreli yazılır)"""
    frame_id: str
    composite_path: Path
    label_path: Optional[Path]
    misalignment: MisalignmentParams
    split: str
    augment_seed: int
    truth_path: Optional[Path] = None
    label_status: str = "pending"
    track_id: int = 0
    track_index: int = 0
    scene_seed: int = 0

    @property
    def has_label(self) -> bool:
        return self.label_status == "success" and self.label_path is not None

    def to_dict(self, root: Path) -> dict:
        """Yolları root'a göre göreli hale getirerek sözlüğe çevir"""
        def rel(p: Optional[Path]) -> Optional[str]:
            if p is None:
                return None
            return Path(os.path.relpath(p, root)).as_posix()

        return {
            "frame_id": self.frame_id,
            "composite_path": rel(self.composite_path),
            "label_path": rel(self.label_path),
            "misalignment": self.misalignment.to_dict(),
            "split": self.split,
            "augment_seed": self.augment_seed,
            "truth_path": rel(self.truth_path),
            "label_status": self.label_status,
            "track_id": self.track_id,
            "track_index": self.track_index,
            "scene_seed": self.scene_seed,
        }

    @classmethod
    def from_dict(cls, data: dict, root: Path) -> "ManifestRecord":
        def resolve(p: Optional[str]) -> Optional[Path]:
            return None if p is None else Path(os.path.normpath(root / p))

        return cls(
            frame_id=data["frame_id"],
            composite_path=resolve(data["composite_path"]),
            label_path=resolve(data.get("label_path")),
            misalignment=MisalignmentParams.from_dict(data["misalignment"]),
            split=data["split"],
            augment_seed=int(data["augment_seed"]),
            truth_path=resolve(data.get("truth_path")),
            label_status=data.get("label_status", "pending"),
            track_id=int(data.get("track_id", 0)),
            track_index=int(data.get("track_index", 0)),
            scene_seed=int(data.get("scene_seed", 0)),
        )


@dataclass
class DatasetManifest:
    """Kare kayıtlarının sıralı listesi"""
    records: List[ManifestRecord] = field(default_factory=list)

    def __post_init__(self):
        ids = [r.frame_id for r in self.records]
        if len(ids) != len(set(ids)):
            raise ValueError("frame_id değerleri tekil olmalı")
        for r in self.records:
            if r.split not in SPLITS:
                raise ValueError(f"{r.frame_id}: geçersiz split '{r.split}'")
            if r.label_status not in LABEL_STATUSES:
                raise ValueError(f"{r.frame_id}: geçersiz label_status '{r.label_status}'")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ManifestRecord]:
        return iter(self.records)

    def get(self, frame_id: str) -> ManifestRecord:
        for r in self.records:
            if r.frame_id == frame_id:
                return r
        raise KeyError(frame_id)

    def by_split(self, split: str, labelled_only: bool = False) -> List[ManifestRecord]:
        """Bölmeye göre kayıtlar (isteğe bağlı sadece başarılı etiketliler)"""
        return [
            r for r in self.records
            if r.split == split and (r.has_label or not labelled_only)
        ]

    def updated(self, changes: Dict[str, dict]) -> "DatasetManifest":
        """frame_id -> alan değişiklikleri uygulanmış yeni manifest"""
        return DatasetManifest([
            replace(r, **changes[r.frame_id]) if r.frame_id in changes else r
            for r in self.records
        ])

    def save(self, path: Path) -> None:
        """JSON-lines olarak kaydet"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        root = path.parent.resolve()
        lines = [
            json.dumps(r.to_dict(root), ensure_ascii=False)
            for r in self.records
        ]
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + ("\n" if lines else ""))
        logger.info(f"Manifest kaydedildi: {path} ({len(lines)} kayıt)")

    @classmethod
    def load(cls, path: Path, validate: bool = True) -> "DatasetManifest":
        """JSON-lines manifestini yükle; validate ile dosya varlığını denetle"""
        path = Path(path)
        if not path.exists():
            raise MissingArtifactError(f"manifest bulunamadı: {path}")

        root = path.parent.resolve()
        with open(path, "r", encoding="utf-8") as f:
            records = [
                ManifestRecord.from_dict(json.loads(line), root)
                for line in f if line.strip()
            ]

        manifest = cls(records)
        if validate:
            manifest.validate_paths()
        return manifest

    def validate_paths(self) -> None:
        """Kayıtlardaki tüm yolların çözülebildiğini doğrula"""
        for r in self.records:
            for p in (r.composite_path, r.truth_path, r.label_path):
                if p is not None and not p.exists():
                    raise MissingArtifactError(f"{r.frame_id}: dosya yok: {p}")
