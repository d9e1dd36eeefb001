"""Verim ve gecikme kıyaslaması"""

from .throughput import (
    BaselineTiming,
    BenchReport,
    BenchSpec,
    bench_baseline,
    bench_inference,
    run_bench,
    speedup,
)
