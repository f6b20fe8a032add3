from pathlib import Path

from scade2b.core.errors import ConfigurationError


def ensure_dir(path: str | Path) -> None:
    Path(path).mkdir(parents=True, exist_ok=True)


def read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc.strerror or exc}") from exc


def write_text(path: str | Path, text: str) -> None:
    target = Path(path)
    if target.parent != Path("."):
        ensure_dir(target.parent)
    target.write_text(text, encoding="utf-8")
