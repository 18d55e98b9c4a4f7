"""Straightforward per-pixel reference implementations of the descriptors.

These follow the descriptor definitions directly with scalar loops (plus
the same fixed term ordering and the same documented conventions: snapped
circle offsets, window-mean removal for LPQ/BSIF, integer rectangle sums
for MB-LBP), so production code images must match them bit for bit.
"""

import numpy as np


def lbp_offsets(radius, neighbors):
    offsets = []
    for i in range(neighbors):
        theta = 2.0 * np.pi * i / neighbors
        dr = radius * np.sin(theta)
        dc = radius * np.cos(theta)
        if abs(dr - round(dr)) < 1e-6:
            dr = float(round(dr))
        if abs(dc - round(dc)) < 1e-6:
            dc = float(round(dc))
        offsets.append((float(dr), float(dc)))
    return offsets


def naive_lbp_codes(pixels, radius, neighbors):
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    offsets = lbp_offsets(radius, neighbors)
    out = np.zeros((h - 2 * radius, w - 2 * radius), dtype=np.uint32)
    for r in range(radius, h - radius):
        for c in range(radius, w - radius):
            center = img[r, c]
            code = 0
            for i, (dr, dc) in enumerate(offsets):
                r0 = int(np.floor(dr))
                c0 = int(np.floor(dc))
                fr = dr - r0
                fc = dc - c0
                if fr == 0.0 and fc == 0.0:
                    diff = img[r + r0, c + c0] - center
                else:
                    def pix(ro, co):
                        ro = min(ro, radius)
                        co = min(co, radius)
                        return img[r + ro, c + co]

                    w00 = (1.0 - fr) * (1.0 - fc)
                    w01 = (1.0 - fr) * fc
                    w10 = fr * (1.0 - fc)
                    w11 = fr * fc
                    diff = w00 * (pix(r0, c0) - center)
                    diff = diff + w01 * (pix(r0, c0 + 1) - center)
                    diff = diff + w10 * (pix(r0 + 1, c0) - center)
                    diff = diff + w11 * (pix(r0 + 1, c0 + 1) - center)
                if diff >= 0.0:
                    code |= 1 << i
            out[r - radius, c - radius] = code
    return out


MBLBP_DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))


def naive_rect_sum(values, center_r, center_c, half):
    total = 0
    for r in range(center_r - half, center_r + half + 1):
        for c in range(center_c - half, center_c + half + 1):
            total += int(values[r, c])
    return total


def naive_mblbp_codes(pixels, rect_side):
    img = np.asarray(pixels)
    h, w = img.shape
    half = (rect_side - 1) // 2
    margin = rect_side + half
    out = np.zeros((h - 2 * margin, w - 2 * margin), dtype=np.uint32)
    for r in range(margin, h - margin):
        for c in range(margin, w - margin):
            center = naive_rect_sum(img, r, c, half)
            code = 0
            for i, (dr, dc) in enumerate(MBLBP_DIRECTIONS):
                neighbor = naive_rect_sum(img, r + dr * rect_side, c + dc * rect_side, half)
                if neighbor >= center:
                    code |= 1 << i
            out[r - margin, c - margin] = code
    return out


def lpq_tables(window_side):
    """Real/imag weights of exp(-2j*pi*u.y) for the four LPQ frequencies."""
    a = 1.0 / window_side
    freqs = [(a, 0.0), (0.0, a), (a, a), (a, -a)]
    half = (window_side - 1) // 2
    re = np.empty((4, window_side, window_side))
    im = np.empty((4, window_side, window_side))
    for i, (ur, uc) in enumerate(freqs):
        phase = np.empty((window_side, window_side))
        for u in range(window_side):
            for v in range(window_side):
                phase[u, v] = 2.0 * np.pi * (ur * (u - half) + uc * (v - half))
        re[i] = np.cos(phase)
        im[i] = -np.sin(phase)
    return re, im


def lpq_rotation(window_side, rho):
    half = (window_side - 1) // 2
    coords = np.array([(r, c) for r in range(-half, half + 1)
                       for c in range(-half, half + 1)], dtype=np.float64)
    deltas = coords[:, None, :] - coords[None, :, :]
    dists = np.sqrt((deltas ** 2).sum(axis=2))
    pixel_cov = rho ** dists
    re, im = lpq_tables(window_side)
    m = np.concatenate([re.reshape(4, -1), im.reshape(4, -1)], axis=0)
    comp_cov = m @ pixel_cov @ m.T
    eigvals, eigvecs = np.linalg.eigh(comp_cov)
    order = np.argsort(eigvals)[::-1]
    rotation = eigvecs[:, order].T.copy()
    for row in rotation:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return rotation


def naive_lpq_codes(pixels, window_side, rho):
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    half = (window_side - 1) // 2
    re_w, im_w = lpq_tables(window_side)
    rotation = lpq_rotation(window_side, rho) if rho > 0.0 else None
    out = np.zeros((h - 2 * half, w - 2 * half), dtype=np.uint32)
    area = float(window_side * window_side)
    for r in range(half, h - half):
        for c in range(half, w - half):
            total = 0.0
            for u in range(window_side):
                for v in range(window_side):
                    total = total + img[r - half + u, c - half + v]
            mean = total / area
            comps = [0.0] * 8
            for u in range(window_side):
                for v in range(window_side):
                    value = img[r - half + u, c - half + v] - mean
                    for i in range(4):
                        comps[i] = comps[i] + re_w[i, u, v] * value
                        comps[4 + i] = comps[4 + i] + im_w[i, u, v] * value
            if rotation is not None:
                rotated = []
                for i in range(8):
                    acc = rotation[i, 0] * comps[0]
                    for j in range(1, 8):
                        acc = acc + rotation[i, j] * comps[j]
                    rotated.append(acc)
                comps = rotated
            code = 0
            for i in range(8):
                if comps[i] > 0.0:
                    code |= 1 << i
            out[r - half, c - half] = code
    return out


def naive_bsif_codes(pixels, filters):
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    n_filters, side, _ = filters.shape
    half = (side - 1) // 2
    area = float(side * side)
    out = np.zeros((h - 2 * half, w - 2 * half), dtype=np.uint32)
    for r in range(half, h - half):
        for c in range(half, w - half):
            total = 0.0
            for u in range(side):
                for v in range(side):
                    total = total + img[r - half + u, c - half + v]
            mean = total / area
            code = 0
            for i in range(n_filters):
                response = None
                for u in range(side):
                    for v in range(side):
                        term = filters[i, u, v] * (img[r - half + u, c - half + v] - mean)
                        response = term if response is None else response + term
                if response > 0.0:
                    code |= 1 << i
            out[r - half, c - half] = code
    return out
