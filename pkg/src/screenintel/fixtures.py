"""Deterministic synthetic fixture corpora.

Each builder writes a self-contained corpus directory:

    <root>/manifest.jsonl     one record per screenshot
    <root>/images/<id>.png    tiny deterministic PNGs
    <root>/replies/<sha>.txt  canned model replies for the fixture backend

The main corpus reproduces the published URL/file/theme arithmetic exactly
(363/337/117/65/155/26 URLs, 1007/189/818/246/239 files, 79/38/23/2
extensions, 28.30%/7.40% themes); the campaign corpora reproduce the three
named campaigns. Everything is generated, never hand-edited: the counts are
asserted at build time.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from pathlib import Path

# seed pinned so select_assessment_sample returns exactly 106 ids on the
# main corpus with base_n=100, min_per_aspect=50 (see tests)
SAMPLE_SEED = 14

N_SCREENSHOTS = 1000


def make_png(tag: str, width: int = 16, height: int = 16) -> bytes:
    """Minimal grayscale PNG with content derived from `tag` (unique bytes)."""
    digest = hashlib.sha256(tag.encode()).digest()
    rows = []
    for y in range(height):
        row = bytes((digest[(x + y * width) % len(digest)] ^ (x * 7 + y * 13)) & 0xFF
                    for x in range(width))
        rows.append(b"\x00" + row)

    def chunk(kind: bytes, data: bytes) -> bytes:
        return (struct.pack(">I", len(data)) + kind + data
                + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF))

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    idat = zlib.compress(b"".join(rows))
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat)
            + chunk(b"IEND", b""))


def compose_reply(main: str, installers: list[str], explorer: list[str],
                  urls: list[str], tabs: list[str], suspicious: list[str],
                  language: str = "English", date: str = "05/03/2023") -> str:
    url_part = "\n".join(f"{i}. {u}" for i, u in enumerate(urls, 1)) if urls else "X"
    tab_part = "\n".join(tabs) if tabs else "X"
    susp_part = "\n".join(f"- {s}" for s in suspicious) if suspicious else "X"
    return (
        "### Main Content:\n"
        f"{main}\n\n"
        "### Files/Programs:\n"
        f"Installer: {', '.join(installers) if installers else 'X'}\n"
        f"File explorer: {', '.join(explorer) if explorer else 'X'}\n\n"
        "### URL\n"
        f"{url_part}\n\n"
        "### Browser Tabs Analysis:\n"
        f"{tab_part}\n\n"
        "### Suspicious Elements:\n"
        f"{susp_part}\n\n"
        "### Language and Date:\n"
        f"- **LANGUAGE:** {language}\n"
        f"- **DATE:** {date}\n"
    )


class _CorpusWriter:
    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "images").mkdir(parents=True, exist_ok=True)
        (self.root / "replies").mkdir(parents=True, exist_ok=True)
        self.manifest_lines: list[str] = []

    def add(self, sid: str, reply: str, family: str = "aurora",
            captured_at: str | None = None, language_hint: str | None = None) -> None:
        png = make_png(sid)
        sha = hashlib.sha256(png).hexdigest()
        (self.root / "images" / f"{sid}.png").write_bytes(png)
        (self.root / "replies" / f"{sha}.txt").write_text(reply, encoding="utf-8")
        entry = {"id": sid, "path": f"images/{sid}.png", "family": family,
                 "log_id": f"log-{sid}"}
        if captured_at:
            entry["captured_at"] = captured_at
        if language_hint:
            entry["language_hint"] = language_hint
        self.manifest_lines.append(json.dumps(entry))

    def finish(self) -> Path:
        manifest = self.root / "manifest.jsonl"
        manifest.write_text("\n".join(self.manifest_lines) + "\n", encoding="utf-8")
        return manifest


def _sid(i: int) -> str:
    return f"s{i:04d}"


def build_paper_corpus(root: Path | str) -> Path:
    """1,000-screenshot corpus pinned to the published extraction arithmetic."""
    w = _CorpusWriter(Path(root))

    # --- URL plan: 363 unique -------------------------------------------------
    urls: dict[int, str] = {}
    # 117 video (s0001..s0117)
    for k, i in enumerate(range(1, 118), 1):
        urls[i] = f"https://www.youtube.com/watch?v=vid{k:05d}"
    # 65 distribution (s0118..s0182), 6 of them ellipsis-truncated
    dist_hosts = ["mega.nz", "mediafire.com", "anonfiles.com", "bit.ly", "cutt.ly",
                  "telegra.ph"]
    for k, i in enumerate(range(118, 183), 1):
        host = dist_hosts[k % len(dist_hosts)]
        tail = "…" if k <= 6 else ""
        urls[i] = f"https://{host}/item{k:04d}{tail}"
    # 155 other domains (s0183..s0337), 20 of them truncated
    for k, i in enumerate(range(183, 338), 1):
        tail = "…" if k <= 20 else ""
        urls[i] = f"https://host-{k:04d}.com/get{tail}"
    # 26 benign (s0338..s0363)
    for k, i in enumerate(range(338, 364), 1):
        urls[i] = f"https://www.google.com/search?q=topic{k:04d}"

    # --- file plan ------------------------------------------------------------
    installers: dict[int, list[str]] = {}
    explorer: dict[int, list[str]] = {}
    susp_files: dict[int, list[str]] = {}

    # 97 retained no-extension installer names (cracked screenshots s0001..s0097)
    for k, i in enumerate(range(1, 98), 1):
        name = f"Prodsuite {k:03d} Crack 2023"
        installers[i] = [name]
        susp_files.setdefault(i, []).append(name)
    # 79 retained .exe explorer files (s0098..s0176)
    exe_names = [f"CrackTool_{k:03d}.exe" for k in range(1, 80)]
    for k, i in enumerate(range(98, 177)):
        explorer[i] = [exe_names[k]]
        susp_files.setdefault(i, []).append(exe_names[k])
    # 2 retained .dll explorer files (s0177, s0178)
    for k, i in enumerate((177, 178), 1):
        name = f"cracklib_{k:02d}.dll"
        explorer[i] = [name]
        susp_files.setdefault(i, []).append(name)
    # 7 duplicate occurrences of retained exe names (s0180..s0186)
    for k, i in enumerate(range(180, 187)):
        explorer[i] = [exe_names[k]]
    # 38 retained .zip in gaming screenshots (s0284..s0321)
    for k, i in enumerate(range(284, 322), 1):
        name = f"ModPack_{k:03d}.zip"
        explorer[i] = [name]
        susp_files.setdefault(i, []).append(name)
    # 23 retained .rar in gaming screenshots (s0322..s0344)
    for k, i in enumerate(range(322, 345), 1):
        name = f"AimBot_{k:03d}.rar"
        explorer[i] = [name]
        susp_files.setdefault(i, []).append(name)
    # 30 generic corroborated installer occurrences (s0187..s0216)
    for i in range(187, 217):
        installers[i] = ["Setup.exe"]
    susp_files.setdefault(187, []).append("Setup.exe")
    # 62 uncorroborated installers (s0421..s0482)
    for k, i in enumerate(range(421, 483), 1):
        installers[i] = [f"Helper_{k:02d}"]
    # filler explorer files: one per "other" screenshot, two for the first 26
    for i in range(358, 1001):
        extra = [f"doc_{_sid(i)}_b.txt"] if i < 384 else []
        explorer.setdefault(i, []).extend([f"doc_{_sid(i)}_a.txt"] + extra)

    n_inst = sum(len(v) for v in installers.values())
    n_other = sum(len(v) for v in explorer.values())
    assert n_inst == 189, n_inst
    assert n_other == 818, n_other

    # --- write screenshots ----------------------------------------------------
    for i in range(1, N_SCREENSHOTS + 1):
        sid = _sid(i)
        if i <= 283:
            main = f"A window advertising cracked software activation, case {i}."
        elif i <= 357:
            main = f"A game overlay offering an aimbot bundle, case {i}."
        else:
            main = f"A desktop with an open document editor, case {i}."

        url_list = [urls[i]] if i in urls else []
        tabs = []
        if 364 <= i <= 420:
            tabs = [f"- [logo: Chrome] [text: News portal {i}] (open tab)"]

        suspicious = []
        if 1 <= i <= 117:
            suspicious.append(f"The video and its download link {urls[i]} look suspicious.")
        elif 118 <= i <= 182:
            suspicious.append(f"The download link {urls[i]} likely serves malware.")
        for name in susp_files.get(i, []):
            suspicious.append(f"The file {name} could contain malware.")

        reply = compose_reply(main, installers.get(i, []), explorer.get(i, []),
                              url_list, tabs, suspicious)
        captured = f"2023-03-{(i % 28) + 1:02d}T10:{i % 60:02d}:00+00:00"
        w.add(sid, reply, captured_at=captured)
    return w.finish()


_BLITZ_LANGS = ["English", "French", "Spanish", "German", "Swedish", "Slovak",
                "Portuguese", "Polish", "Hindi", "Norwegian", "Arabic", "Korean",
                "Dutch", "Hungarian", "Thai"]


def build_blitz_corpus(root: Path | str) -> Path:
    """57 infections via java-gapp.space in an 18h09m window; 18 Minecraft-linked."""
    w = _CorpusWriter(Path(root))
    # endpoints pinned; the rest spread inside the window
    stamps = ["2023-02-11T22:55:00+01:00"]
    for k in range(1, 56):
        minutes = 55 + k * 18  # stays well inside the window
        hh, mm = divmod(minutes, 60)
        stamps.append(f"2023-02-{11 + (22 + hh) // 24:02d}T{(22 + hh) % 24:02d}:{mm:02d}:00+01:00")
    stamps.append("2023-02-12T17:04:00+01:00")

    for k in range(57):
        sid = f"b{k + 1:03d}"
        sub = "go" if k % 2 == 0 else "new"
        url = f"https://{sub}.java-gapp.space/dl{k:03d}"
        minecraft = k < 18
        main = (f"A sponsored result mimicking the official Java download page, device {k}."
                + (" The victim searched for a Minecraft 1.19 shader pack needing Optifine."
                   if minecraft else ""))
        reply = compose_reply(
            main,
            installers=["Java_Setup.exe"],
            explorer=["Java_Client.zip"],
            urls=[url],
            tabs=[],
            suspicious=[f"The download {url} delivering Java_Client.zip and "
                        "Java_Setup.exe is suspicious."],
            language=_BLITZ_LANGS[k % len(_BLITZ_LANGS)],
        )
        w.add(sid, reply, captured_at=stamps[k],
              language_hint=_BLITZ_LANGS[k % len(_BLITZ_LANGS)])
    return w.finish()


def build_midjourney_corpus(root: Path | str) -> Path:
    """63 infections via typosquatted MidJourney domains."""
    w = _CorpusWriter(Path(root))
    for k in range(63):
        sid = f"m{k + 1:03d}"
        if k < 40:
            url = f"https://ai.mid-j0urney.org/win{k:03d}"
        else:
            url = f"https://get.mid-journey.com/dl{k:03d}"
        reply = compose_reply(
            f"A page mimicking the MidJourney platform offering a free beta, device {k}.",
            installers=["MidJourney_Beta.exe"],
            explorer=[],
            urls=[url],
            tabs=[],
            suspicious=[f"The page {url} pushing MidJourney_Beta.exe is suspicious."],
        )
        w.add(sid, reply, captured_at=f"2023-04-01T{8 + k % 12:02d}:{k % 60:02d}:00+00:00")
    return w.finish()


_SNOW_LANGS = ["French", "English", "Spanish", "Italian", "German", "Vietnamese",
               "Japanese", "Thai", "Arabic", "Polish", "Dutch", "Swedish",
               "Turkish", "Portuguese", "Chinese", "Korean"]


def build_snow_corpus(root: Path | str) -> Path:
    """Office-2022-crack campaign: one video, telegra.ph redirect, MEGA archive."""
    w = _CorpusWriter(Path(root))
    for k, lang in enumerate(_SNOW_LANGS):
        sid = f"n{k + 1:03d}"
        reply = compose_reply(
            "A tutorial video promising a cracked Microsoft Office 2022, "
            f"device {k}.",
            installers=[],
            explorer=["Microsoft_Office_Crack_2022.rar", "win-32.dll", "win-64.dll",
                      "@fomicvell.exe", "data"],
            urls=["https://www.youtube.com/watch?v=SnowOffice22",
                  "https://telegra.ph/Office-2022-free",
                  "https://mega.nz/file/SNOW2022"],
            tabs=[],
            suspicious=["The archive Microsoft_Office_Crack_2022.rar fetched from "
                        "https://mega.nz/file/SNOW2022 and the executable "
                        "@fomicvell.exe are suspicious."],
            language=lang,
        )
        w.add(sid, reply, captured_at=f"2022-12-{(k % 20) + 1:02d}T12:00:00+00:00",
              language_hint=lang)
    return w.finish()


def write_table3_consensus_csv(path: Path | str) -> Path:
    """Consensus scores reproducing the published assessment table.

    106 screenshots e001..e106. Browser tabs has only 104 rows (the published
    table's occurrences sum to 104 while the sample is 106).
    """
    rows: list[tuple[str, str, int]] = []
    ids = [f"e{k:03d}" for k in range(1, 107)]

    for k, sid in enumerate(ids, 1):
        rows.append((sid, "GeneralDescription", 2 if k <= 102 else 1))
        rows.append((sid, "FileIdentification", 2 if k <= 90 else 99))
        # tabs: 18x0, 16x1, 15x2, 55x99; e105/e106 unscored
        if k <= 18:
            rows.append((sid, "BrowserTabs", 0))
        elif k <= 34:
            rows.append((sid, "BrowserTabs", 1))
        elif k <= 49:
            rows.append((sid, "BrowserTabs", 2))
        elif k <= 104:
            rows.append((sid, "BrowserTabs", 99))
        # suspicious: constrained so the 34 tab-failures split 26/5/1/2
        if k <= 26:
            susp = 2
        elif k <= 31:
            susp = 1
        elif k == 32:
            susp = 0
        elif k <= 34:
            susp = 99
        elif k <= 98:
            susp = 2
        elif k <= 105:
            susp = 1
        else:
            susp = 0
        rows.append((sid, "SuspiciousElements", susp))

    path = Path(path)
    lines = ["screenshot_id,aspect,score,rationale"]
    lines += [f"{sid},{aspect},{score}," for sid, aspect, score in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
