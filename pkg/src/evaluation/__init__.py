"""Değerlendirme: R², eriyik havuzu bölgesi, trend serileri"""

from .metrics import MpRegion, MpStats, R2Accumulator, detect_mp, mp_stats, r_squared
from .trend import Evaluator, TrendReport, predict_maps, trend_series
