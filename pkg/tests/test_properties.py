"""Generated-input law checks. Each law runs >= 1,000 cases."""

import hashlib
import string
import tempfile
from pathlib import Path

from hypothesis import given, settings, strategies as st

from screenintel.backend import DescriptionCache, FixtureBackend, describe
from screenintel.campaigns import ClusterParams, ScreenshotBundle, cluster_campaigns
from screenintel.corpus import ScreenshotRecord
from screenintel.descparse import ParsedDescription, SuspiciousElement, parse_description
from screenintel.fixtures import make_png
from screenintel.iocs import Lexicons, extract_files, extract_urls, filter_files
from screenintel.prompt import build_prompt

LAW = settings(max_examples=1000, deadline=None)

LEX = Lexicons.default()

_hostnames = st.sampled_from(
    ["youtube.com", "www.youtube.com", "mega.nz", "bit.ly", "google.com",
     "evil-one.net", "evil-two.org", "host-a.com", "host-b.com"])
_paths = st.text(alphabet=string.ascii_lowercase + string.digits, min_size=0,
                 max_size=6)
_urls = st.builds(lambda h, p: f"https://{h}/{p}", _hostnames, _paths)


def _desc(i, urls):
    return ParsedDescription(screenshot_id=f"s{i}", url_entries=list(urls))


_corpora = st.lists(st.lists(_urls, max_size=5), min_size=1, max_size=6)


@LAW
@given(_corpora)
def test_url_extraction_idempotent_and_deduped(corpus_urls):
    corpus = [_desc(i, us) for i, us in enumerate(corpus_urls)]
    iocs1, stats1 = extract_urls(corpus, LEX)
    iocs2, stats2 = extract_urls(corpus, LEX)
    assert [u.to_dict() for u in iocs1] == [u.to_dict() for u in iocs2]
    norms = [u.normalized for u in iocs1]
    assert len(norms) == len(set(norms)) == stats1.total_unique
    assert stats1.to_dict() == stats2.to_dict()


@LAW
@given(_corpora)
def test_url_category_partition(corpus_urls):
    corpus = [_desc(i, us) for i, us in enumerate(corpus_urls)]
    _, stats = extract_urls(corpus, LEX)
    assert stats.actionable == stats.total_unique - stats.benign_count
    assert sum(stats.by_category.values()) == stats.actionable
    assert stats.truncated_count <= stats.total_unique


@LAW
@given(_corpora, st.lists(_urls, max_size=5))
def test_url_monotonicity(corpus_urls, extra):
    corpus = [_desc(i, us) for i, us in enumerate(corpus_urls)]
    _, before = extract_urls(corpus, LEX)
    _, after = extract_urls(corpus + [_desc(len(corpus), extra)], LEX)
    assert after.total_unique >= before.total_unique
    assert after.benign_count >= before.benign_count
    for cat, n in before.by_category.items():
        assert after.by_category[cat] >= n


_names = st.sampled_from(
    ["Evil.exe", "CrackPack.zip", "Mod.rar", "thing.dll", "Setup.exe",
     "install", "Weird Tool 2023", "data", "notes.txt", "Payload.exe"])


def _file_desc(i, names, suspicious_names):
    susp = [SuspiciousElement(raw=f"The file {n} could contain malware.")
            for n in suspicious_names]
    return ParsedDescription(screenshot_id=f"s{i}", installers=list(names[:1]),
                             explorer_files=list(names[1:]), suspicious=susp)


_file_corpora = st.lists(
    st.tuples(st.lists(_names, max_size=4), st.lists(_names, max_size=2)),
    min_size=1, max_size=6)


@LAW
@given(_file_corpora, st.randoms(use_true_random=False))
def test_file_filter_order_independent_and_inclusions(spec, rnd):
    corpus = [_file_desc(i, names, susp) for i, (names, susp) in enumerate(spec)]
    files1, _ = extract_files(corpus)
    retained1 = {f.name for f in filter_files(files1, corpus, LEX)}

    shuffled = list(corpus)
    rnd.shuffle(shuffled)
    files2, _ = extract_files(shuffled)
    retained2 = {f.name for f in filter_files(files2, shuffled, LEX)}
    assert retained1 == retained2

    all_names = {f.name for f in files1}
    corroborated = {f.name for f in files1 if f.suspicious_corroborated}
    generic = {f.name for f in files1 if f.generic}
    assert retained1 <= corroborated <= all_names
    assert not retained1 & generic


_indicators = st.sampled_from(
    [("Domain", "a.com"), ("Domain", "b.com"), ("Domain", "c.com"),
     ("FileStem", "tool"), ("FileStem", "pack"), ("ThemeTerm", "lure")])
_bundle_sets = st.lists(st.sets(_indicators, max_size=3), min_size=1, max_size=8)


@LAW
@given(_bundle_sets, st.randoms(use_true_random=False))
def test_clustering_permutation_invariance(indicator_sets, rnd):
    bundles = [ScreenshotBundle(screenshot_id=f"s{i}", indicators=set(inds))
               for i, inds in enumerate(indicator_sets)]
    params = ClusterParams(min_cluster_size=1)
    base = {frozenset(c.member_ids) for c in cluster_campaigns(bundles, params)}
    shuffled = list(bundles)
    rnd.shuffle(shuffled)
    again = {frozenset(c.member_ids) for c in cluster_campaigns(shuffled, params)}
    assert base == again


@LAW
@given(_bundle_sets)
def test_clustering_connectivity(indicator_sets):
    bundles = [ScreenshotBundle(screenshot_id=f"s{i}", indicators=set(inds))
               for i, inds in enumerate(indicator_sets)]
    by_id = {b.screenshot_id: b for b in bundles}
    clusters = cluster_campaigns(bundles, ClusterParams(min_cluster_size=1))

    # every member reachable from every other via shared-indicator edges
    for c in clusters:
        members = sorted(c.member_ids)
        seen = {members[0]}
        frontier = [members[0]]
        while frontier:
            cur = frontier.pop()
            for other in members:
                if other not in seen and by_id[cur].indicators & by_id[other].indicators:
                    seen.add(other)
                    frontier.append(other)
        assert seen == set(members)

    # and members with indicators are covered exactly once
    covered = [m for c in clusters for m in c.member_ids]
    expected = [b.screenshot_id for b in bundles if b.indicators]
    assert sorted(covered) == sorted(expected)


@LAW
@given(st.text(max_size=400))
def test_parse_totality_and_conservation(text):
    parsed = parse_description("t", text)
    assert parsed.screenshot_id == "t"
    assert parsed.reconstruct() == text


_section_bodies = st.sampled_from(["X", "x", '"X"', "  X  "])


@LAW
@given(_section_bodies, _section_bodies, _section_bodies)
def test_placeholder_law(files_body, url_body, tabs_body):
    text = (f"### Files/Programs:\n{files_body}\n\n"
            f"### URL\n{url_body}\n\n"
            f"### Browser Tabs Analysis:\n{tabs_body}\n")
    p = parse_description("t", text)
    assert p.installers == [] and p.explorer_files == []
    assert p.url_entries == [] and p.tabs == []


class _CountingFixture(FixtureBackend):
    def __init__(self, fixture_dir):
        super().__init__(fixture_dir)
        self.calls = 0

    def submit(self, prompt_text, image_b64, media_type):
        self.calls += 1
        return super().submit(prompt_text, image_b64, media_type)


_TEMPLATE = build_prompt("v1")


@LAW
@given(st.text(st.characters(blacklist_categories=("Cs",),
                             blacklist_characters="\r"), min_size=1,
               max_size=50).filter(str.strip), st.integers(0, 10 ** 6))
def test_cache_idempotence(reply_text, tag):
    with tempfile.TemporaryDirectory() as td:
        root = Path(td)
        png = make_png(f"prop-{tag}")
        sha = hashlib.sha256(png).hexdigest()
        (root / "img.png").write_bytes(png)
        (root / f"{sha}.txt").write_text(reply_text, encoding="utf-8")
        rec = ScreenshotRecord(id="r", path=str(root / "img.png"), sha256=sha,
                               family="aurora", log_id="l")
        backend = _CountingFixture(root)
        cache = DescriptionCache(root / "cache")
        first = describe(rec, _TEMPLATE, backend, cache)
        second = describe(rec, _TEMPLATE, backend, cache)
        assert backend.calls == 1
        assert not first.from_cache and second.from_cache
        assert second.text == first.text == reply_text
