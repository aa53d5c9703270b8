#!/usr/bin/env python3
"""Regenerates the .pptx and PNG fixtures under tests/fixtures.

The committed fixtures were produced by this script; rerunning it changes
zip timestamps but not content.
"""

import argparse
import struct
import zlib
from pathlib import Path

from pptx import Presentation
from pptx.util import Pt, Emu


def png(width, height, rgb, stripe=None):
    """Writes a flat-colour RGB PNG, optionally with a horizontal stripe."""
    rows = []
    for y in range(height):
        colour = stripe if stripe and height // 3 <= y < 2 * height // 3 else rgb
        rows.append(b"\x00" + bytes(colour) * width)
    raw = b"".join(rows)

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw, 9))
            + chunk(b"IEND", b""))


def widescreen():
    prs = Presentation()
    prs.slide_width = Emu(12192000)
    prs.slide_height = Emu(6858000)
    return prs


def bullets(shape, lines):
    tf = shape.text_frame
    tf.text = lines[0]
    for line in lines[1:]:
        tf.add_paragraph().text = line


def academic(path, media):
    prs = widescreen()
    s = prs.slides.add_slide(prs.slide_layouts[0])
    s.shapes.title.text = "Title Title Title Title"
    s.placeholders[1].text = "Venue and Date"
    box = s.shapes.add_textbox(Pt(47), Pt(324), Pt(347), Pt(96))
    box.text_frame.text = "Presenter: Presenter 1, Presenter 2, ..."
    box.text_frame.paragraphs[0].runs[0].font.size = Pt(18)
    box.text_frame.paragraphs[0].runs[0].font.bold = True

    s = prs.slides.add_slide(prs.slide_layouts[1])
    s.shapes.title.text = "Section Title"
    bullets(s.placeholders[1], ["First point", "Second point", "Third point"])

    s = prs.slides.add_slide(prs.slide_layouts[8])
    s.shapes.title.text = "Figure Title"
    s.placeholders[2].text = "Figure caption and short explanation"

    s = prs.slides.add_slide(prs.slide_layouts[3])
    s.shapes.title.text = "Comparison"
    bullets(s.placeholders[1], ["Left column point"])
    bullets(s.placeholders[2], ["Right column point"])

    s = prs.slides.add_slide(prs.slide_layouts[5])
    s.shapes.title.text = "Results Table"
    table = s.shapes.add_table(3, 3, Pt(60), Pt(140), Pt(600), Pt(150)).table
    for r, row in enumerate([["Method", "Score", "Cost"], ["A", "1", "2"], ["B", "3", "4"]]):
        for c, value in enumerate(row):
            table.cell(r, c).text = value
    prs.save(path)


def minimal(path, media):
    prs = widescreen()
    s = prs.slides.add_slide(prs.slide_layouts[0])
    s.shapes.title.text = "Deck Title"
    s.placeholders[1].text = "Author Names"

    s = prs.slides.add_slide(prs.slide_layouts[1])
    s.shapes.title.text = "Agenda"
    bullets(s.placeholders[1], ["Topic one", "Topic two"])

    s = prs.slides.add_slide(prs.slide_layouts[5])
    s.shapes.title.text = "Image Slide"
    s.shapes.add_picture(str(media / "template_photo.png"), Pt(120), Pt(110), Pt(480), Pt(270))
    cap = s.shapes.add_textbox(Pt(120), Pt(400), Pt(480), Pt(40))
    cap.text_frame.text = "Image caption"

    s = prs.slides.add_slide(prs.slide_layouts[6])
    group = s.shapes.add_group_shape()
    for i, label in enumerate(["Step one", "Step two", "Step three"]):
        tb = group.shapes.add_textbox(Pt(80 + 260 * i), Pt(200), Pt(220), Pt(80))
        tb.text_frame.text = label
    header = s.shapes.add_textbox(Pt(80), Pt(60), Pt(760), Pt(60))
    header.text_frame.text = "Process Overview"

    s = prs.slides.add_slide(prs.slide_layouts[1])
    s.shapes.title.text = "Thank You"
    bullets(s.placeholders[1], ["Questions"])
    prs.save(path)


def classic(path, media):
    prs = Presentation()  # 4:3
    s = prs.slides.add_slide(prs.slide_layouts[0])
    s.shapes.title.text = "Talk Title"
    s.placeholders[1].text = "Speaker"

    s = prs.slides.add_slide(prs.slide_layouts[2])
    s.shapes.title.text = "Section Header"
    s.placeholders[1].text = "Section subtitle"

    s = prs.slides.add_slide(prs.slide_layouts[1])
    s.shapes.title.text = "Key Ideas"
    bullets(s.placeholders[1], ["Idea A", "Idea B", "Idea C", "Idea D"])

    s = prs.slides.add_slide(prs.slide_layouts[8])
    s.shapes.title.text = "Visual Evidence"
    s.placeholders[2].text = "What the figure shows"

    s = prs.slides.add_slide(prs.slide_layouts[4])
    s.shapes.title.text = "Before and After"
    s.placeholders[1].text = "Before"
    bullets(s.placeholders[2], ["Old behaviour"])
    s.placeholders[3].text = "After"
    bullets(s.placeholders[4], ["New behaviour"])

    s = prs.slides.add_slide(prs.slide_layouts[1])
    s.shapes.title.text = "Summary"
    bullets(s.placeholders[1], ["Takeaway"])
    prs.save(path)


def reference_slides(path):
    prs = widescreen()
    content = [
        ("Streaming Joins at Scale", ["A reference talk"]),
        ("Why Joins Stall", ["Skewed keys overload single workers", "Backpressure spreads upstream"]),
        ("Adaptive Partitioning", ["Split hot keys on the fly", "Merge cold partitions"]),
        ("Evaluation Setup", ["Three public traces", "Two cluster sizes"]),
        ("Throughput Results", ["2.1x median speedup", "Tail latency cut by 40%"]),
        ("Takeaways", ["Skew handling belongs in the runtime", "Cheap to deploy"]),
    ]
    for i, (title, lines) in enumerate(content):
        s = prs.slides.add_slide(prs.slide_layouts[0 if i == 0 else 1])
        s.shapes.title.text = title
        bullets(s.placeholders[1], lines)
    prs.save(path)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("fixture_dir", type=Path)
    args = ap.parse_args()
    root = args.fixture_dir
    media = root / "media"
    media.mkdir(parents=True, exist_ok=True)
    (media / "template_photo.png").write_bytes(png(64, 36, (40, 90, 160), (230, 230, 230)))

    templates = root / "templates"
    templates.mkdir(exist_ok=True)
    academic(templates / "academic.pptx", media)
    minimal(templates / "minimal.pptx", media)
    classic(templates / "classic.pptx", media)

    assets = root / "papers" / "target" / "assets"
    assets.mkdir(parents=True, exist_ok=True)
    (assets / "fig_overview.png").write_bytes(png(80, 40, (200, 60, 60)))
    (assets / "fig_pipeline.png").write_bytes(png(60, 60, (60, 160, 90), (250, 250, 250)))
    (assets / "table_main.png").write_bytes(png(90, 30, (240, 240, 240), (30, 30, 30)))
    (assets / "fig_ablation.png").write_bytes(png(40, 80, (120, 60, 200)))

    ref = root / "papers" / "reference"
    (ref / "assets").mkdir(parents=True, exist_ok=True)
    (ref / "assets" / "fig_skew.png").write_bytes(png(50, 30, (250, 180, 40)))
    reference_slides(ref / "slides.pptx")


if __name__ == "__main__":
    main()
