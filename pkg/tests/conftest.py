import numpy as np
import pytest

from stutterkit.labels import load_manifest
from stutterkit.synth import SynthSpec, synth_data


@pytest.fixture(scope="session")
def separable_dataset(tmp_path_factory):
    """Bundle-mode synthetic set: strong class signal in stream 3."""
    out = tmp_path_factory.mktemp("synth_sep")
    path = synth_data(
        SynthSpec(n_per_class=50, dim=16, n_frames=22, separation=10.0, seed=5), str(out)
    )
    return load_manifest(path)


@pytest.fixture(scope="session")
def chance_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth_chance")
    path = synth_data(
        SynthSpec(n_per_class=50, dim=16, n_frames=20, separation=0.0, seed=11), str(out)
    )
    return load_manifest(path)


def write_manifest_csv(path, rows):
    lines = ["id,audio_path,embedding_path,label,split"]
    lines += [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def manifest_csv(tmp_path):
    def _make(rows, name="manifest.csv"):
        return write_manifest_csv(tmp_path / name, rows)

    return _make
