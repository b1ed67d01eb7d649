"""
設定・較正定数ローダー

YAML設定ファイルの読み込みと、較正定数を保存する小さなキー値ファイルの管理を行う
"""

import os
import tempfile
from pathlib import Path
from typing import Dict, Optional, Union

import yaml
from loguru import logger

from .. import __version__
from ..errors import ConfigError


DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config" / "riesz_defaults.yaml"


def load_defaults(path: Optional[Union[str, Path]] = None) -> Dict:
    """
    設定ファイルを読み込む

    Parameters
    ----------
    path : str or Path, optional
        設定ファイルのパス（Noneの場合はデフォルト設定）

    Returns
    -------
    dict
        設定辞書
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f) or {}

    if not isinstance(config, dict):
        raise ConfigError(f"Config file must contain a mapping: {config_path}")

    logger.debug(f"Loaded config from {config_path}")
    return config


def merge_config(base: Dict, override: Dict) -> Dict:
    """入れ子の辞書を再帰的に上書きマージする"""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


class CalibrationStore:
    """
    較正定数の永続化ストア

    次元 n をキーに定数と残差を保存する。保存時のツールバージョンと
    一致しない項目は古いものとして扱い、再計算の対象にする。
    """

    def __init__(self, path: Union[str, Path] = "calibration.yaml", version: str = __version__):
        """
        Parameters
        ----------
        path : str or Path
            キー値ファイルのパス
        version : str
            現在のツールバージョン
        """
        self.path = Path(path)
        self.version = version

    def _read(self) -> Dict:
        if not self.path.exists():
            return {}
        with open(self.path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            logger.warning(f"Ignoring malformed calibration file: {self.path}")
            return {}
        return data

    def get(self, n: int) -> Optional[Dict]:
        """
        保存済みの較正結果を返す

        Returns
        -------
        dict or None
            {"constant": float, "residual": float}。未保存またはバージョン不一致ならNone
        """
        entry = self._read().get("constants", {}).get(int(n))
        if entry is None:
            return None
        if entry.get("version") != self.version:
            logger.warning(
                f"Calibration for n={n} is stale (stored {entry.get('version')}, current {self.version})"
            )
            return None
        return entry

    def put(self, n: int, constant: float, residual: float) -> None:
        """較正結果を書き込む（一時ファイル経由で原子的に置換）"""
        data = self._read()
        constants = data.setdefault("constants", {})
        constants[int(n)] = {
            "constant": float(constant),
            "residual": float(residual),
            "version": self.version,
        }

        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".calibration-", suffix=".yaml")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                yaml.safe_dump(data, f, sort_keys=True)
            os.replace(tmp, self.path)
        except Exception:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        logger.info(f"Saved calibration for n={n} to {self.path}")
