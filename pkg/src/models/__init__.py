"""Model modülleri"""
