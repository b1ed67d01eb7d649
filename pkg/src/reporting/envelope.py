"""
実行結果のまとめとファイル出力

CSV（格子点ごとの行）とJSON（要約）を一時ファイル経由で書き出す。
出力は設定とバージョンだけで決まり、実行時刻や所要時間は含めない。
"""

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from .. import __version__
from .bound_report import BoundReport, ConvergenceReport, _json_float

CSV_FLOAT_FORMAT = "%.16e"


def write_atomic(path: Union[str, Path], text: str) -> Path:
    """テキストを一時ファイルに書いてから置換する"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return path


@dataclass
class ProfileEntry:
    """
    核の断面（kernel / heat コマンドの出力）

    Attributes
    ----------
    name : str
        核の名前
    rs : np.ndarray
        半径
    values : np.ndarray
        核の値
    floor : np.ndarray, optional
        雑音下限
    params : dict
        パラメータ
    """

    name: str
    rs: np.ndarray
    values: np.ndarray
    floor: Optional[np.ndarray] = None
    params: Dict[str, Any] = field(default_factory=dict)
    passed: bool = True

    def to_dict(self) -> Dict[str, Any]:
        values = np.asarray(self.values)
        return _json_float({
            "name": self.name,
            "kind": "profile",
            "passed": self.passed,
            "message": f"{values.size} radii, max |value| {np.max(np.abs(values)):.6g}",
            "params": dict(self.params),
        })

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"r": self.rs, "value": np.real(self.values)})
        if np.iscomplexobj(self.values):
            frame["value_imag"] = np.imag(self.values)
        if self.floor is not None:
            frame["floor"] = self.floor
        frame.insert(0, "check", self.name)
        return frame


@dataclass
class CalibrationEntry:
    """逆変換定数の較正結果"""

    n: int
    constant: float
    residual: float
    tolerance: float
    source: str = "computed"

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return _json_float({
            "name": f"calibration-n{self.n}",
            "kind": "calibration",
            "passed": self.passed,
            "message": f"C={self.constant:.15g} ({self.source}), residual {self.residual:.3e}",
            "details": {"n": self.n, "constant": self.constant, "residual": self.residual, "source": self.source},
            "tolerance": {"residual": self.tolerance},
        })

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "check": [f"calibration-n{self.n}"],
            "n": [self.n],
            "constant": [self.constant],
            "residual": [self.residual],
        })


Entry = Union[BoundReport, ConvergenceReport, ProfileEntry, CalibrationEntry]


@dataclass
class ReportEnvelope:
    """
    1回の実行結果

    Attributes
    ----------
    command : str
        サブコマンド名
    config : dict
        実行設定の写し
    entries : list
        BoundReport / ConvergenceReport / ProfileEntry
    version : str
        ツールバージョン
    """

    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    entries: List[Entry] = field(default_factory=list)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(bool(e.passed) for e in self.entries)

    def add(self, entry: Entry) -> Entry:
        self.entries.append(entry)
        return entry

    def failures(self) -> List[str]:
        return [e.to_dict()["name"] for e in self.entries if not e.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "command": self.command,
            "config": _json_float(self.config),
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def to_frame(self) -> pd.DataFrame:
        """全エントリの行を縦に連結する"""
        frames = [e.to_frame() for e in self.entries]
        if not frames:
            return pd.DataFrame({"check": []})
        return pd.concat(frames, ignore_index=True, sort=False)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    def write(self, out: Union[str, Path], fmt: str = "csv") -> List[Path]:
        """
        ファイルに書き出す

        Parameters
        ----------
        out : str or Path
            出力パス（拡張子は形式に合わせて付け替える）
        fmt : str
            "csv" ならCSVとJSON要約の両方、"json" ならJSONのみ

        Returns
        -------
        list of Path
            書き出したファイル
        """
        out = Path(out)
        written = []
        if fmt == "csv":
            written.append(write_atomic(out.with_suffix(".csv"), self.to_csv()))
        written.append(write_atomic(out.with_suffix(".json"), self.to_json()))
        for path in written:
            logger.info(f"Wrote {path}")
        return written
