"""Synthesized sample clips for the extractor tests.

The clips are drawn with OpenCV: a textured static background, dark
rectangles standing in for players, and a small bright disc for the ball.
MJPG/AVI is used because every OpenCV build can write it.
"""

from __future__ import annotations

import cv2
import numpy as np
import pytest

WIDTH, HEIGHT, FPS = 480, 360, 30.0


def checker_background(rng: np.random.Generator) -> np.ndarray:
    base = np.full((HEIGHT, WIDTH, 3), 90, np.uint8)
    noise = rng.integers(0, 25, size=(HEIGHT, WIDTH, 1), dtype=np.uint8)
    return cv2.add(base, np.repeat(noise, 3, axis=2))


RED_KIT = ((30, 30, 150), (60, 60, 200))     # body, head (BGR)
BLUE_KIT = ((150, 60, 30), (200, 110, 60))


def draw_player(frame: np.ndarray, cx: float, top: float, h: float,
                kit=RED_KIT) -> None:
    body, head = kit
    w = 0.38 * h
    cv2.rectangle(frame,
                  (int(cx - w / 2), int(top)),
                  (int(cx + w / 2), int(top + h)),
                  body, thickness=-1)
    # a lighter "head" blob keeps the silhouette person-like
    cv2.circle(frame, (int(cx), int(top + 0.08 * h)), int(0.10 * h),
               head, thickness=-1)


def write_clip(path, n_frames: int = 90, with_players: bool = True,
               with_ball: bool = True) -> None:
    """Red carrier walking right with the ball at chest height; blue tackler
    (staggered lower so both stay partly visible through contact) closing
    from the right, boxes overlapping over roughly the final ten frames."""
    rng = np.random.default_rng(7)
    background = checker_background(rng)
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"),
                             FPS, (WIDTH, HEIGHT))
    assert writer.isOpened(), "MJPG writer unavailable"
    for k in range(n_frames):
        frame = background.copy()
        t = k / FPS
        if with_players:
            draw_player(frame, cx=400 - 45 * t, top=150, h=160, kit=BLUE_KIT)
            draw_player(frame, cx=140 + 30 * t, top=120, h=170, kit=RED_KIT)
        if with_ball:
            bx = int(150 + 30 * t)
            by = int(176)
            cv2.circle(frame, (bx, by), 7, (250, 250, 250), thickness=-1)
        writer.write(frame)
    writer.release()


@pytest.fixture(scope="session")
def sample_clip(tmp_path_factory):
    path = tmp_path_factory.mktemp("clips") / "sample.avi"
    write_clip(path)
    return path


@pytest.fixture(scope="session")
def empty_clip(tmp_path_factory):
    path = tmp_path_factory.mktemp("clips") / "empty.avi"
    write_clip(path, n_frames=40, with_players=False, with_ball=True)
    return path
