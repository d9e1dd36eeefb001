"""Komut satırı giriş noktası"""
