import hashlib
import os

import pandas as pd
import yaml

FLOAT_FORMAT = "%.17g"


class ReportWriter:
    """
    Writes data tables as CSV and their run manifests as YAML documents next
    to them.
    """

    def __init__(self, float_format: str = FLOAT_FORMAT):
        self.float_format = float_format

    @staticmethod
    def _ensure_directory(path: str):
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.exists(directory):
            os.makedirs(directory)

    def write_table(self, data, path: str) -> str:
        self._ensure_directory(path)
        frame = data if isinstance(data, pd.DataFrame) else pd.DataFrame(data)
        frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n")
        return path

    def write_manifest(self, manifest: dict, data_path: str) -> str:
        path = f"{data_path}.manifest"
        self._ensure_directory(path)
        with open(path, "w", encoding="utf-8") as file:
            yaml.safe_dump(manifest, file, sort_keys=False)
        return path

    @staticmethod
    def dump_document(document: dict) -> str:
        return yaml.safe_dump(document, sort_keys=False)


def file_digest(path: str) -> str:
    with open(path, "rb") as file:
        return hashlib.sha256(file.read()).hexdigest()
