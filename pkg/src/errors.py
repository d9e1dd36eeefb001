"""
BinoTherm hata sınıfları
Tüm modüller bu hiyerarşiden hata fırlatır; CLI çıkış kodlarını buradan belirler.
"""


class BinoThermError(Exception):
    """Tüm proje hatalarının kökü"""

    kind = "binotherm"


class ShapeError(BinoThermError, ValueError):
    """Tensör/görüntü boyut uyuşmazlığı"""

    kind = "shape"


class NonFiniteError(BinoThermError):
    """NaN veya Inf değer tespit edildi"""

    kind = "non_finite"


class PyrometryError(BinoThermError, ValueError):
    """Geçersiz pirometri girdisi (pozitif olmayan dalga boyu, oran vb.)"""

    kind = "pyrometry"


class MprfFormatError(BinoThermError):
    """Bozuk veya desteklenmeyen MPRF/BNCK dosyası"""

    kind = "format"


class CompositeError(BinoThermError):
    """Kanal görüntüsü sensör yarısına sığmıyor"""

    kind = "composite"


class RegistrationError(BinoThermError):
    """Kayıt (registration) yapılamayan kare"""

    kind = "registration"


class EvaluationError(BinoThermError, ValueError):
    """Tanımsız metrik (ör. sıfır varyans)"""

    kind = "evaluation"


class MissingArtifactError(BinoThermError, FileNotFoundError):
    """Önceki aşamanın çıktısı bulunamadı"""

    kind = "missing_artifact"


class ConfigError(BinoThermError):
    """Geçersiz çalışma konfigürasyonu"""

    kind = "config"


class BenchError(BinoThermError, ValueError):
    """Kıyaslama için yetersiz kare"""

    kind = "bench"
