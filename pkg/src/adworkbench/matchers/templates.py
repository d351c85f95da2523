"""Template bundles: a directory of logo PNGs, a manifest, and cached digests."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from adworkbench.imaging import Image, load_png
from adworkbench.matchers.hashing import HASH_GRID, HashDigest, average_hash

# bump when the hash pipeline changes; stale sidecars are regenerated
DIGEST_CACHE_VERSION = f"ahash-v1-grid{HASH_GRID}"


def bundled_logo_dir() -> Path:
    """Directory of the 12 ad-disclosure logos shipped with the package."""
    return Path(resources.files("adworkbench").joinpath("data", "logos"))


@dataclass
class TemplateBundle:
    names: list[str]
    logos: dict[str, Image]
    digests: dict[str, HashDigest]

    @classmethod
    def load(cls, directory=None) -> "TemplateBundle":
        directory = Path(directory) if directory is not None else bundled_logo_dir()
        manifest = directory / "manifest.txt"
        if not manifest.exists():
            raise FileNotFoundError(f"no template manifest at {manifest}")
        names = [line.strip() for line in manifest.read_text().splitlines() if line.strip()]
        logos = {name: load_png(directory / f"{name}.png") for name in names}
        digests = cls._load_or_build_digests(directory, names, logos)
        return cls(names=names, logos=logos, digests=digests)

    @staticmethod
    def _load_or_build_digests(directory: Path, names, logos) -> dict[str, HashDigest]:
        sidecar = directory / "digests.json"
        if sidecar.exists():
            try:
                cached = json.loads(sidecar.read_text())
                if cached.get("version") == DIGEST_CACHE_VERSION and set(cached["digests"]) == set(names):
                    return {
                        name: HashDigest(tuple(int(v) != 0 for v in bin(int(h, 16))[2:].zfill(64)))
                        for name, h in cached["digests"].items()
                    }
            except (ValueError, KeyError):
                pass
        digests = {name: average_hash(logos[name]) for name in names}
        payload = {
            "version": DIGEST_CACHE_VERSION,
            "digests": {name: digests[name].hex() for name in names},
        }
        try:
            sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        except OSError:
            pass  # read-only install; cache is an optimization only
        return digests

    def digest_list(self) -> list[HashDigest]:
        return [self.digests[name] for name in self.names]


# generator seeds behind the bundled logos; curated so the whole set is
# evadable by transparent padding and keeps moderate keypoint counts
BUNDLED_LOGO_SEEDS = (3, 4, 5, 21, 36, 37, 53, 54, 58, 66, 74, 81)


def build_bundle(directory, seeds=BUNDLED_LOGO_SEEDS) -> "TemplateBundle":
    """Materialize the logo bundle (PNGs + manifest + digest sidecar)."""
    from adworkbench.imaging import save_png
    from adworkbench.pagegen.synth import make_logo

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, seed in enumerate(seeds):
        name = f"logo{i:02d}"
        save_png(make_logo(seed), directory / f"{name}.png")
        names.append(name)
    (directory / "manifest.txt").write_text("\n".join(names) + "\n")
    (directory / "digests.json").unlink(missing_ok=True)
    return TemplateBundle.load(directory)
