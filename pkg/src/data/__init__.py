"""Veri modülleri: MPRF formatı, sentetik sahneler, manifest, yükleyici"""

from .manifest import DatasetManifest, ManifestRecord
from .scene_generator import FramePair, SceneGenerator, make_scene, render_pair, write_dataset
from .augmentation import AugmentSpec, enumerate_augments
from .dataset_loader import LoaderTable, load_batch
