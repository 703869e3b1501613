"""
fracmix 실행 진입점

사용법:
    python main.py --config configs/invert_sine.json
"""

from src.cli import main

if __name__ == "__main__":
    main()
