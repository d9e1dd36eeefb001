"""
BinoTherm: İki Dalga Boylu Eriyik Havuzu Sıcaklık Ölçümü
"""

__version__ = "0.1.0"
