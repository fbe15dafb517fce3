import json

import numpy as np
import pytest

from sara.errors import (CorruptFile, DimensionMismatch, DuplicateImageId,
                         MissingFile, NormalizationFailure, OutOfBoundsKeypoint)
from sara.features import (DatasetManifest, ImageFeatures, ManifestEntry,
                           load_features, load_manifest, read_features,
                           write_features, write_manifest, write_pair_list)


def make_features(image_id="img", n=12, d=128, d_g=64, size=(640, 480),
                  seed=0, with_scores=False, with_k=False):
    rng = np.random.default_rng(seed)
    kps = np.column_stack([
        rng.uniform(0, size[0] - 1, n), rng.uniform(0, size[1] - 1, n),
    ]).astype(np.float32)
    desc = rng.normal(size=(n, d)).astype(np.float32)
    desc /= np.linalg.norm(desc, axis=1, keepdims=True)
    gdesc = rng.normal(size=d_g).astype(np.float32)
    gdesc /= np.linalg.norm(gdesc)
    scores = rng.uniform(0, 1, n).astype(np.float32) if with_scores else None
    K = np.array([[500.0, 0, 320], [0, 500, 240], [0, 0, 1]]) if with_k else None
    return ImageFeatures(image_id=image_id, keypoints=kps, descriptors=desc,
                         global_desc=gdesc, image_size=size, scores=scores,
                         intrinsics=K)


def write_dataset(tmp_path, n_images=3, d=128, d_g=64):
    entries = []
    for i in range(n_images):
        feats = make_features(f"img_{i}", seed=i, d=d, d_g=d_g)
        fpath = tmp_path / f"img_{i}.sarf"
        write_features(feats, fpath)
        entries.append(ManifestEntry(image_id=f"img_{i}", path=fpath))
    manifest = DatasetManifest(entries=tuple(entries), descriptor_dim=d, global_dim=d_g)
    mpath = tmp_path / "manifest.json"
    write_manifest(manifest, mpath)
    return mpath


class TestValidation:
    def test_out_of_bounds_keypoint(self):
        feats = make_features()
        feats.keypoints[0] = (-3.0, 10.0)
        with pytest.raises(OutOfBoundsKeypoint):
            feats.validate()

    def test_keypoint_at_width_rejected(self):
        feats = make_features(size=(640, 480))
        feats.keypoints[0] = (640.0, 10.0)   # domain is half-open
        with pytest.raises(OutOfBoundsKeypoint):
            feats.validate()

    def test_denormalized_descriptor(self):
        feats = make_features()
        feats.descriptors[3] *= 0.5
        with pytest.raises(NormalizationFailure):
            feats.validate()

    def test_denormalized_global(self):
        feats = make_features()
        feats.global_desc[:] = feats.global_desc * 1.01
        with pytest.raises(NormalizationFailure):
            feats.validate()

    def test_count_mismatch(self):
        feats = make_features()
        feats = ImageFeatures(image_id=feats.image_id,
                              keypoints=feats.keypoints[:5],
                              descriptors=feats.descriptors,
                              global_desc=feats.global_desc,
                              image_size=feats.image_size)
        with pytest.raises(ValueError):
            feats.validate()

    def test_score_range(self):
        feats = make_features(with_scores=True)
        feats.scores[0] = 1.5
        with pytest.raises(ValueError):
            feats.validate()

    def test_empty_image_is_valid(self):
        feats = make_features(n=0)
        feats.validate()


class TestRoundTrip:
    @pytest.mark.parametrize("with_scores", [False, True])
    @pytest.mark.parametrize("with_k", [False, True])
    def test_bit_exact(self, tmp_path, with_scores, with_k):
        feats = make_features(with_scores=with_scores, with_k=with_k)
        path = tmp_path / "f.sarf"
        write_features(feats, path)
        loaded = read_features(path, image_id=feats.image_id)
        assert loaded.image_id == feats.image_id
        assert loaded.image_size == feats.image_size
        np.testing.assert_array_equal(loaded.keypoints, feats.keypoints)
        np.testing.assert_array_equal(loaded.descriptors, feats.descriptors)
        np.testing.assert_array_equal(loaded.global_desc, feats.global_desc)
        if with_scores:
            np.testing.assert_array_equal(loaded.scores, feats.scores)
        else:
            assert loaded.scores is None
        if with_k:
            np.testing.assert_array_equal(loaded.intrinsics, feats.intrinsics)
        else:
            assert loaded.intrinsics is None

    def test_rewrite_is_byte_identical(self, tmp_path):
        feats = make_features(with_scores=True, with_k=True)
        p1, p2 = tmp_path / "a.sarf", tmp_path / "b.sarf"
        write_features(feats, p1)
        write_features(read_features(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_image_id_defaults_to_stem(self, tmp_path):
        path = tmp_path / "view_07.sarf"
        write_features(make_features(), path)
        assert read_features(path).image_id == "view_07"

    def test_empty_round_trip(self, tmp_path):
        feats = make_features(n=0)
        path = tmp_path / "empty.sarf"
        write_features(feats, path)
        loaded = read_features(path)
        assert loaded.n_keypoints == 0
        assert loaded.descriptors.shape == (0, 128)


class TestCorruption:
    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            read_features(tmp_path / "nope.sarf")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "f.sarf"
        write_features(make_features(), path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"JUNK"
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptFile):
            read_features(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "f.sarf"
        write_features(make_features(), path)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(CorruptFile):
            read_features(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "f.sarf"
        write_features(make_features(), path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(CorruptFile):
            read_features(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "f.sarf"
        write_features(make_features(), path)
        raw = bytearray(path.read_bytes())
        raw[4] = 9
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptFile):
            read_features(path)


class TestManifest:
    def test_load_ok(self, tmp_path):
        manifest = load_manifest(write_dataset(tmp_path))
        assert len(manifest) == 3
        assert manifest.image_ids == ["img_0", "img_1", "img_2"]
        assert manifest.descriptor_dim == 128

    def test_relative_paths(self, tmp_path):
        mpath = write_dataset(tmp_path)
        data = json.loads(mpath.read_text())
        assert all(not p["path"].startswith("/") for p in data["entries"])
        # loading still resolves them against the manifest directory
        feats = load_features(load_manifest(mpath), "img_1")
        assert feats.n_keypoints == 12

    def test_duplicate_id(self, tmp_path):
        mpath = write_dataset(tmp_path)
        data = json.loads(mpath.read_text())
        data["entries"].append(dict(data["entries"][0]))
        mpath.write_text(json.dumps(data))
        with pytest.raises(DuplicateImageId):
            load_manifest(mpath)

    def test_missing_referenced_file(self, tmp_path):
        mpath = write_dataset(tmp_path)
        (tmp_path / "img_1.sarf").unlink()
        with pytest.raises(MissingFile, match="img_1"):
            load_manifest(mpath)

    def test_dimension_mismatch(self, tmp_path):
        mpath = write_dataset(tmp_path)
        write_features(make_features("img_1", d=64, seed=1), tmp_path / "img_1.sarf")
        with pytest.raises(DimensionMismatch):
            load_manifest(mpath)

    def test_global_dim_mismatch(self, tmp_path):
        mpath = write_dataset(tmp_path)
        write_features(make_features("img_1", d_g=32, seed=1), tmp_path / "img_1.sarf")
        with pytest.raises(DimensionMismatch):
            load_manifest(mpath)

    def test_manifest_intrinsics_override(self, tmp_path):
        mpath = write_dataset(tmp_path)
        data = json.loads(mpath.read_text())
        K = [[800.0, 0.0, 320.0], [0.0, 800.0, 240.0], [0.0, 0.0, 1.0]]
        data["entries"][0]["intrinsics"] = K
        mpath.write_text(json.dumps(data))
        feats = load_features(load_manifest(mpath), "img_0")
        np.testing.assert_array_equal(feats.intrinsics, np.asarray(K))

    def test_unknown_image_id(self, tmp_path):
        manifest = load_manifest(write_dataset(tmp_path))
        with pytest.raises(MissingFile):
            load_features(manifest, "img_9")

    def test_not_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{oops")
        with pytest.raises(CorruptFile):
            load_manifest(path)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"entries": []}))
        with pytest.raises(CorruptFile):
            load_manifest(path)


class TestPairList:
    def test_orders_within_line(self, tmp_path):
        path = tmp_path / "pairs.txt"
        write_pair_list([("b.jpg", "a.jpg")], path)
        assert path.read_text() == "a.jpg b.jpg\n"

    def test_empty(self, tmp_path):
        path = tmp_path / "pairs.txt"
        write_pair_list([], path)
        assert path.read_text() == ""

    def test_sorted_lines(self, tmp_path):
        path = tmp_path / "pairs.txt"
        write_pair_list([("c", "b"), ("b", "a"), ("a", "c")], path)
        assert path.read_text().splitlines() == ["a b", "a c", "b c"]

    def test_self_pair_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_pair_list([("a", "a")], tmp_path / "pairs.txt")

    def test_whitespace_id_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_pair_list([("a b", "c")], tmp_path / "pairs.txt")

    def test_input_order_irrelevant(self, tmp_path):
        rng = np.random.default_rng(3)
        edges = [(f"v{i}", f"v{j}") for i in range(20) for j in range(i + 1, 20)]
        p1, p2 = tmp_path / "p1.txt", tmp_path / "p2.txt"
        write_pair_list(edges, p1)
        shuffled = [edges[i][::-1] for i in rng.permutation(len(edges))]
        write_pair_list(shuffled, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert len(p1.read_text().splitlines()) == len(edges)
