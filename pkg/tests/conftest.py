"""
テスト共通のフィクスチャ
"""

import sys
from pathlib import Path

import pytest

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.geometry.space import SpaceParams
from src.transforms.spherical import ensure_calibrated


@pytest.fixture(scope="session")
def calibrated_h3():
    """較正済みの H³"""
    sp = SpaceParams(3)
    ensure_calibrated(sp)
    return sp


@pytest.fixture(scope="session")
def calibrated_h2():
    """較正済みの H²"""
    sp = SpaceParams(2)
    ensure_calibrated(sp)
    return sp
