"""Smoke test for the greyvc_py extension module.

Build the module first (see python/run_smoke_test.sh): it compiles the
cdylib with cargo and places it next to this script as greyvc_py.so.
"""

import sys

import greyvc_py as gv


def main() -> int:
    img = gv.quantize(4, 2, [0, 128, 255, 0, 255, 128, 0, 255], 3)
    assert (img.width, img.height, img.g) == (4, 2, 3)
    assert img.levels() == [0, 1, 2, 0, 2, 1, 0, 2]
    assert list(img.render()) == [0, 127, 255, 0, 255, 127, 0, 255]

    expected_files = {"baseline": 3, "A": 9, "B": 9, "C": 6}
    expected_expansion = {"baseline": 6, "A": 2, "B": 6, "C": 12}
    for kind in ["baseline", "A", "B", "C"]:
        scheme = gv.Scheme(kind, k=2, n=3, g=3, seed=7)
        assert scheme.pixel_expansion == expected_expansion[kind], kind

        shared = scheme.encode(img)
        assert len(shared.file_names()) == expected_files[kind], kind
        assert '"scheme"' in shared.manifest_json()

        width, height, bits = shared.share_bits(1, 1)
        assert (width, height) == (4 * scheme.pixel_expansion, 2)
        assert set(bits) <= {0, 1}

        for members in ([1, 2], [1, 3], [2, 3], None):
            back = shared.decode(members)
            assert back.levels() == img.levels(), (kind, members)

        alpha = {"baseline": (1, 6)}.get(kind, (1, 2))
        for lower, upper, num, den in shared.contrasts([1, 2]):
            assert (num, den) == alpha, (kind, lower, upper, num, den)

    # Same seed, same dealing; different seed, different transparencies.
    again = gv.Scheme("B", k=2, n=3, g=3, seed=7).encode(img)
    assert again.share_bits(1, 1) == shared_bits_of("B", img, seed=7)
    other = gv.Scheme("B", k=2, n=3, g=3, seed=8).encode(img)
    assert other.share_bits(1, 1) != shared_bits_of("B", img, seed=7)

    try:
        gv.Scheme("A", k=2, n=3, g=1)
    except ValueError:
        pass
    else:
        raise AssertionError("g=1 must be rejected")

    report = gv.comparison_report(2, 3, 3)
    assert "scheme comparison at (k=2, n=3, g=3)" in report
    assert "1/6" in report

    passed, text = gv.run_verification()
    assert "golden fixtures:" in text
    assert passed, text

    print("smoke test passed")
    return 0


def shared_bits_of(kind: str, img, seed: int):
    return gv.Scheme(kind, k=2, n=3, g=3, seed=seed).encode(img).share_bits(1, 1)


if __name__ == "__main__":
    sys.exit(main())
