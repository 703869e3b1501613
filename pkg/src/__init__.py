"""
fracmix - 혼합형 시간 분수 포물-쌍곡 방정식의 역원천 문제 풀이 도구
"""

__version__ = '1.0.0'
