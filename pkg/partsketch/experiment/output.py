import csv
import io
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import aiofiles

from ..codec import dumps
from ..matrix import DenseMatrix, matrix_to_bytes, matrix_to_csv

__all__ = ["csv_text", "ensure_dir", "write_json", "write_matrix", "write_text"]

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def ensure_dir(path: PathLike) -> Path:
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Renders rows as CSV with a header line, floats in shortest round-trip form"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


async def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    async with aiofiles.open(path, "w", encoding="utf-8") as out:
        await out.write(text)
    logger.info("Wrote %s", path)
    return path


async def write_json(path: PathLike, obj: Any) -> Path:
    return await write_text(path, dumps(obj))


async def write_matrix(path: PathLike, matrix: DenseMatrix) -> Path:
    """Writes matrix as binary when the suffix is .bin otherwise as CSV"""
    path = Path(path)
    if path.suffix.lower() == ".bin":
        async with aiofiles.open(path, "wb") as out:
            await out.write(matrix_to_bytes(matrix))
        logger.info("Wrote %s", path)
        return path
    return await write_text(path, matrix_to_csv(matrix))
