"""Fizik modülleri"""
