#!/usr/bin/env python3
"""Generates the sandisk_mini fixture set and trains its bundled model.

    python3 tools/gen_fixture.py --pp build/tools/pp --out fixtures
"""
import argparse
import datetime as dt
import json
import os
import random
import shutil
import subprocess
import sys
import tempfile

EVAL = dt.date(2025, 6, 30)
SEED = 20250630

# Every planted abstract and claim set uses exactly these content words.
PLANTED_VOCAB = sorted("nand flash memory controller block erase wear write amplification "
                       "reducing endurance high density storage data".split())

PLANTED_ABSTRACTS = [
    "A NAND flash memory controller for reducing write amplification and block erase wear in high density storage with data endurance.",
    "A high density NAND flash storage controller with block erase wear data for reducing write amplification and memory endurance.",
    "Reducing write amplification in high density NAND flash memory storage, the controller has block erase wear and endurance data.",
    "A controller of high density NAND flash memory storage with endurance data on block erase wear for reducing write amplification.",
]

PLANTED_CLAIMS = [
    ("A NAND flash memory controller comprising: a block erase wear data storage; "
     "a write amplification reducing memory; and a high density endurance data block.",
     "The controller of claim 1, wherein the block erase wear data is flash memory endurance data."),
    ("A high density NAND flash storage controller comprising: an endurance data memory; "
     "a block erase wear data block; and a write amplification reducing data storage.",
     "The controller of claim 1, wherein the endurance data memory is NAND flash storage."),
    ("A memory controller comprising: a NAND flash block erase wear storage; "
     "a reducing write amplification data block; and a high density endurance memory.",
     "The controller of claim 1, wherein the high density endurance memory is flash storage."),
]

PLANTED_TITLES = [
    "Wear-aware block erase scheduling for high density NAND",
    "Controller-side write amplification reduction",
    "Endurance data tracking in flash storage controllers",
    "Block erase wear leveling with endurance records",
    "Write path shaping for dense NAND flash",
    "Erase budget accounting in memory controllers",
    "Endurance-driven block retirement",
    "Adaptive wear tables for NAND flash storage",
    "Write amplification telemetry for flash controllers",
    "Dense NAND erase cycle management",
    "Storage controller endurance ledger",
    "Flash block wear balancing across dies",
]

DOMAINS = {
    "G11C": {
        "cpc": ["G11C7/10", "G11C11/4091", "G11C5/14", "G11C29/50"],
        "words": "sense amplifier bitline wordline voltage threshold charge pump latch timing refresh "
                 "cell capacitor decoder row column precharge leakage transistor programming verify "
                 "pulse temperature compensation".split(),
        "heads": ["circuit", "device", "array", "method"],
        "count": 32,
    },
    "H01L": {
        "cpc": ["H01L23/498", "H01L21/56", "H01L25/065"],
        "words": "package substrate die bump interposer solder warpage underfill wafer bonding thermal "
                 "via molding redistribution layer pad stack trench dielectric copper silicon".split(),
        "heads": ["structure", "assembly", "method", "device"],
        "count": 40,
    },
    "G06F": {
        "cpc": ["G06F3/06", "G06F12/02", "G06F9/50"],
        "words": "host queue command namespace interface firmware scheduler cache prefetch latency "
                 "request virtual partition journal metadata snapshot compression encryption key file".split(),
        "heads": ["system", "apparatus", "method", "medium"],
        "count": 40,
    },
    "H01M": {
        "cpc": ["H01M10/44", "H01M4/36", "H01M50/20"],
        "words": "battery cathode anode electrolyte lithium separator charge degradation rates pack "
                 "module balancing electrode coating cycling impedance".split(),
        "heads": ["composition", "device", "method", "system"],
        "count": 20,
    },
    "H04L": {
        "cpc": ["H04L45/00", "H04L47/12", "H04L9/40"],
        "words": "packet routing latency switch protocol bandwidth queue handshake session tunnel frame "
                 "link retransmission congestion fabric".split(),
        "heads": ["system", "apparatus", "method"],
        "count": 20,
    },
}

ASSIGNEES = ["SanDisk Technologies LLC", "SANDISK TECHNOLOGIES, INC.", "SanDisk Corp.",
             "Western Digital Technologies, Inc.", "WDC Inc"]
COUNTRIES = ["USA", "CHN", "JPN", "KOR", "DEU", "TWN", "GBR"]
GNI = {"USA": 27.7e12, "CHN": 18.3e12, "JPN": 4.5e12, "KOR": 1.8e12, "DEU": 4.6e12,
       "TWN": 0.8e12, "GBR": 3.4e12, "FRA": 3.1e12}
FIRST_NAMES = ["Ana", "Bo", "Chen", "Dara", "Eli", "Farah", "Goran", "Hana", "Ivo", "Jun", "Kiri", "Lev"]
LAST_NAMES = ["Arai", "Brandt", "Costa", "Duval", "Eng", "Fischer", "Gupta", "Hale", "Iwata", "Joshi"]


def iso(d):
    return d.isoformat()


def add_years(d, years):
    try:
        return d.replace(year=d.year + years)
    except ValueError:
        return d.replace(year=d.year + years, day=28)


def rand_date(rng, lo, hi):
    return lo + dt.timedelta(days=rng.randrange((hi - lo).days + 1))


class Ids:
    def __init__(self):
        self.n = 10_412_000

    def next(self, granted=True):
        self.n += 137
        return f"US{self.n}B2" if granted else f"US2023{self.n % 10_000_000:07d}A1"


def inventors(rng, strong):
    out = []
    for _ in range(rng.randint(1, 3)):
        out.append({
            "name": f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}",
            "h_index": rng.randint(18, 45) if strong else rng.randint(1, 20),
            "collaborations": rng.randint(3, 30),
            "litigation_success": round(rng.uniform(0.5, 1.0) if strong else rng.uniform(0.0, 0.6), 2),
        })
    return out


def forward_citations(rng, grant, n):
    lo = max(grant, EVAL - dt.timedelta(days=3 * 365))
    if lo > EVAL:
        return []
    return [{"citing_id": f"US{11_000_000 + rng.randrange(900_000)}B2", "date": iso(rand_date(rng, lo, EVAL))}
            for _ in range(n)]


def direct_metrics(rng, strong):
    if strong:
        return {"TRL": rng.randint(8, 9), "MRL": rng.randint(8, 10), "N_app": rng.randint(12, 25),
                "N_comp": rng.randint(2, 6), "T_market": round(rng.uniform(0.5, 1.5), 2),
                "P_cost": round(rng.uniform(-0.3, 0.0), 2), "S_mfg": round(rng.uniform(0.7, 0.95), 2),
                "S_invest": round(rng.uniform(0.7, 1.0), 2), "S_owner": round(rng.uniform(0.6, 0.9), 2),
                "S_forecast": round(rng.uniform(0.7, 0.95), 2), "N_launch": rng.randint(4, 9),
                "R_mat": round(rng.uniform(0.1, 0.3), 2), "R_mfg": round(rng.uniform(0.1, 0.3), 2),
                "R_work": round(rng.uniform(0.1, 0.3), 2)}
    return {"TRL": rng.randint(2, 8), "MRL": rng.randint(2, 8), "N_app": rng.randint(0, 12),
            "N_comp": rng.randint(3, 15), "T_market": round(rng.uniform(1.0, 6.0), 2),
            "P_cost": round(rng.uniform(-0.1, 0.3), 2), "S_mfg": round(rng.uniform(0.2, 0.8), 2),
            "S_invest": round(rng.uniform(0.0, 0.7), 2), "S_owner": round(rng.uniform(0.1, 0.8), 2),
            "S_forecast": round(rng.uniform(0.1, 0.8), 2), "N_launch": rng.randint(0, 5),
            "R_mat": round(rng.uniform(0.2, 0.9), 2), "R_mfg": round(rng.uniform(0.2, 0.9), 2),
            "R_work": round(rng.uniform(0.2, 0.9), 2)}


def domain_text(rng, dom):
    w = rng.sample(dom["words"], 10)
    head = rng.choice(dom["heads"])
    noun = "method" if head == "method" else head
    abstract = (f"A {noun} uses {w[0]} {w[1]} and {w[2]} {w[3]} to improve {w[4]} {w[5]}. "
                f"The {w[6]} {w[7]} is tuned by the {w[8]} {w[9]}.")
    if head == "method":
        c1 = f"A method comprising: sensing a {w[0]} {w[1]}; adjusting the {w[2]} {w[3]}; and updating a {w[4]} {w[5]}."
    elif head == "composition":
        c1 = f"A composition consisting of: a {w[0]} {w[1]}; and a {w[2]} {w[3]} at 5 to 20 percent by weight."
    else:
        c1 = f"A {head} comprising: a {w[0]} {w[1]}; a {w[2]} {w[3]} coupled to the {w[0]} {w[1]}; and a {w[4]} {w[5]}."
    if rng.random() < 0.3:
        c1 = c1[:-1] + f"; and a {w[6]} layer of at least 3 nm."
    c2 = f"The {noun} of claim 1, wherein the {w[2]} {w[3]} includes a {w[6]} {w[7]}."
    title = f"{w[0].capitalize()} {w[1]} {w[2]} for {w[4]} {w[5]}"
    return title, abstract, [{"number": 1, "text": c1}, {"number": 2, "text": c2}]


def base_record(rng, ids, granted, filing, grant, status, cpc, title, abstract, claims, strong):
    return {
        "patent_id": ids.next(granted),
        "title": title,
        "abstract": abstract,
        "claims": claims,
        "filing_date": iso(filing),
        "grant_date": iso(grant) if grant else None,
        "expiry_date": iso(add_years(filing, 20)),
        "legal_status": status,
        "assignee_raw": rng.choice(ASSIGNEES),
        "inventors": inventors(rng, strong),
        "cpc_codes": cpc,
        "family_members": [f"{c}{rng.randrange(10**7):07d}" for c in
                           rng.sample(["CN", "JP", "KR", "DE", "TW", "EP"], rng.randint(4, 6) if strong else rng.randint(0, 3))],
        "jurisdictions": [{"country": c, "status": "Granted" if strong or rng.random() < 0.6 else "Pending"}
                          for c in (["USA"] + rng.sample(COUNTRIES[1:], rng.randint(3, 5) if strong else rng.randint(0, 3)))],
        "backward_citations": [f"US{8_000_000 + rng.randrange(2_000_000)}B2" for _ in range(rng.randint(5, 25))],
        "examiner_citations": [f"US{7_000_000 + rng.randrange(2_000_000)}B1" for _ in range(rng.randint(0, 8))],
        "reassignments": [],
        "litigation_events": [],
        "rejection_events": {"n102": rng.randint(0, 1 if strong else 3), "n103": rng.randint(0, 2 if strong else 4),
                             "n112": rng.randint(0, 2)},
        "cip_flag": rng.random() < 0.1,
        "direct_metrics": direct_metrics(rng, strong),
    }


def build_portfolio(rng):
    ids = Ids()
    records, planted = [], []
    for i in range(12):
        filing = rand_date(rng, dt.date(2020, 8, 1), dt.date(2021, 6, 30))
        grant = filing + dt.timedelta(days=rng.randint(600, 900))
        claims = PLANTED_CLAIMS[i % len(PLANTED_CLAIMS)]
        r = base_record(rng, ids, True, filing, grant, "Granted", ["G11C16/34", "G06F12/02"], PLANTED_TITLES[i],
                        PLANTED_ABSTRACTS[i % len(PLANTED_ABSTRACTS)],
                        [{"number": 1, "text": claims[0]}, {"number": 2, "text": claims[1]}], True)
        r["forward_citations"] = forward_citations(rng, grant, rng.randint(18, 40))
        r["litigation_events"] = [{"outcome": "PlaintiffWin", "case_value": float(rng.randint(5, 40)) * 1e6}]
        r["cip_flag"] = False
        records.append(r)
        planted.append(r["patent_id"])

    # Weaker neighbours sharing the planted category.
    for _ in range(8):
        filing = rand_date(rng, dt.date(2020, 8, 1), dt.date(2022, 6, 30))
        grant = filing + dt.timedelta(days=rng.randint(600, 1000))
        pending = grant > EVAL - dt.timedelta(days=30)
        title, abstract, claims = domain_text(rng, DOMAINS["G11C"])
        r = base_record(rng, ids, not pending, filing, None if pending else grant, "Pending" if pending else "Granted",
                        ["G11C16/10"], title, abstract, claims, False)
        r["forward_citations"] = [] if pending else forward_citations(rng, grant, rng.randint(0, 4))
        records.append(r)

    for name, dom in DOMAINS.items():
        for _ in range(dom["count"]):
            filing = rand_date(rng, dt.date(2006, 1, 1), dt.date(2022, 12, 31))
            pending = filing.year >= 2021 and rng.random() < 0.5
            grant = None if pending else min(filing + dt.timedelta(days=rng.randint(500, 1500)), EVAL - dt.timedelta(days=30))
            title, abstract, claims = domain_text(rng, dom)
            r = base_record(rng, ids, not pending, filing, grant, "Pending" if pending else "Granted",
                            [rng.choice(dom["cpc"])], title, abstract, claims, False)
            r["forward_citations"] = forward_citations(rng, grant, rng.randint(0, 12)) if grant else []
            if rng.random() < 0.2:
                r["litigation_events"] = [{"outcome": rng.choice(["Settlement", "DefendantWin", "PlaintiffWin"]),
                                           "case_value": float(rng.randint(1, 10)) * 1e6}]
            if rng.random() < 0.25:
                r["reassignments"] = [{"date": iso(rand_date(rng, filing, EVAL)), "from": r["assignee_raw"],
                                       "to": "SanDisk Technologies LLC"}]
            for field in rng.sample(["inventors", "jurisdictions", "litigation_events", "rejection_events",
                                     "direct_metrics", "forward_citations"], rng.choice([0, 0, 0, 1, 2])):
                del r[field]
            records.append(r)

    # Records the legal filter removes.
    for status in ["Expired"] * 5 + ["Abandoned"] * 4 + ["Lapsed"] * 3 + ["Invalidated"] * 3 + ["Granted"] * 3:
        dom = DOMAINS[rng.choice(sorted(DOMAINS))]
        if status == "Granted":
            filing = rand_date(rng, dt.date(2003, 1, 1), dt.date(2005, 5, 31))
        else:
            filing = rand_date(rng, dt.date(2004, 1, 1), dt.date(2016, 12, 31))
        grant = filing + dt.timedelta(days=rng.randint(500, 1200))
        title, abstract, claims = domain_text(rng, dom)
        r = base_record(rng, ids, True, filing, grant, status, [rng.choice(dom["cpc"])], title, abstract, claims, False)
        r["forward_citations"] = forward_citations(rng, grant, rng.randint(0, 5))
        records.append(r)

    order = list(range(len(records)))
    rng.shuffle(order)
    return [records[i] for i in order], planted


PLANTED_NEED = ("reducing write amplification and block erase wear in the controller of high density "
                "NAND flash memory storage for data endurance")
PLANTED_NEED_ALT = ("block erase wear and write amplification in high density NAND flash memory storage, "
                    "reducing data endurance of the controller")


def needs_corpus():
    docs = [
        ("SW-10K-2025", "RegulatoryFiling", "2025-03-14",
         "Sungwon Electronics Co., Ltd. annual report. Risk factors follow. "
         f"Sungwon Electronics Co., Ltd. is struggling with {PLANTED_NEED}. "
         "Failure to resolve this is a critical risk to our enterprise SSD roadmap."),
        ("SW-EC-2025Q1", "EarningsCall", "2025-01-28",
         f"Operator: welcome to the call. Our CFO noted that Sungwon continues to struggle with {PLANTED_NEED_ALT}. "
         "We are urgently evaluating licensing options."),
        ("SW-NEWS-2024-11", "News", "2024-11-05",
         f"Industry sources say Sungwon Electronics is seeking {PLANTED_NEED}. "
         "The company declined to comment."),
        ("MR-STORAGE-2024", "MarketReport", "2024-09-10",
         "Enterprise flash outlook. Demand for dense NAND keeps rising. "
         f"Sungwon Electronics Co., Ltd. is investing in {PLANTED_NEED}."),
        ("SW-BLOG-2025-05", "Blog", "2025-05-20",
         f"A teardown shows Sungwon struggles with {PLANTED_NEED_ALT}."),
        ("SW-NEWS-2025-06", "News", "2025-06-02",
         f"Sungwon Electronics needs {PLANTED_NEED}; analysts call the gap immediate."),
        ("SW-NEWS-2023-02", "News", "2023-02-11",
         f"Sungwon Electronics is struggling with {PLANTED_NEED}."),
        ("NV-EC-2025Q1", "EarningsCall", "2025-02-19",
         "Thank you all for joining. Norvia Motors is struggling with reducing battery degradation at high charge rates. "
         "We expect improvements next year."),
        ("NV-NEWS-2025-04", "News", "2025-04-08",
         "Norvia Motors Inc. is seeking reducing battery degradation at high charge rates."),
        ("AX-MR-2025", "MarketReport", "2025-03-01",
         "Altrix Networks is seeking lower packet routing latency in congested switch fabrics."),
        ("KF-NEWS-2025", "News", "2025-01-15",
         "Kestrel Foundry GmbH needs thinner package substrate with reduced warpage."),
        ("PC-BLOG-2024", "Blog", "2024-12-03",
         "Pelican Cloud is investing in host command queue scheduling for virtual namespaces."),
        ("SW-NEWS-2025-02", "News", "2025-02-27",
         "Sungwon Electronics lacks domestic supply of wafer bonding equipment."),
        ("MISC-NEWS-2025", "News", "2025-05-05",
         "Shares rose on Tuesday. Analysts expect a quiet quarter for the sector."),
    ]
    return [{"doc_id": d, "source_type": s, "date": dt_, "text": t} for d, s, dt_, t in docs]


MARKET = {
    "G11C": {"tam_usd": 6.8e10, "revenue_usd": 1.2e10, "market_start": 5.1e10, "market_end": 6.8e10,
             "horizon_years": 4, "filings_start": 2100, "filings_end": 2900, "signal_power": 4.0,
             "noise_power": 1.0, "deals_value_usd": 2.4e9, "deals_count": 6,
             "partnership_counts": {"JointVenture": 2, "Licensing": 5, "MoU": 3}},
    "G11C16": {"tam_usd": 4.1e10, "revenue_usd": 8.5e9, "market_start": 2.9e10, "market_end": 4.1e10,
               "horizon_years": 4, "filings_start": 900, "filings_end": 1500, "signal_power": 9.0,
               "noise_power": 1.0, "deals_value_usd": 3.1e9, "deals_count": 4,
               "partnership_counts": {"JointVenture": 3, "Licensing": 6}},
    "H01L": {"tam_usd": 3.3e10, "revenue_usd": 4.0e9, "market_start": 2.8e10, "market_end": 3.3e10,
             "horizon_years": 4, "filings_start": 4000, "filings_end": 4300, "signal_power": 2.0,
             "noise_power": 1.0, "deals_value_usd": 9.0e8, "deals_count": 5,
             "partnership_counts": {"Licensing": 4, "MoU": 2}},
    "G06F": {"tam_usd": 2.2e10, "revenue_usd": 2.5e9, "market_start": 1.9e10, "market_end": 2.2e10,
             "horizon_years": 4, "filings_start": 5200, "filings_end": 5000, "signal_power": 1.5,
             "noise_power": 1.0, "deals_value_usd": 4.0e8, "deals_count": 3,
             "partnership_counts": {"Licensing": 2}},
    "H01M": {"tam_usd": 9.0e10, "market_start": 6.0e10, "market_end": 9.0e10, "horizon_years": 4,
             "filings_start": 3000, "filings_end": 4200, "signal_power": 3.0, "noise_power": 1.0,
             "partnership_counts": {"JointVenture": 1}},
    "H04L": {"filings_start": 6000, "filings_end": 6100, "horizon_years": 4},
}


def grade_of(v):
    vals = dict(zip(NAMES, v["values"]))
    miss = dict(zip(NAMES, v["missing_mask"]))
    g = 0.35 * min(1.0, vals["L_rem"] / 20.0) + 0.25 * vals["S_claim"]
    g += 0.0 if miss["V_cite"] else 0.25 * min(1.0, vals["V_cite"] / 8.0)
    g += 0.0 if miss["TRL"] else 0.15 * vals["TRL"] / 9.0
    return min(2, int(3.0 * g))


NAMES = ["L_rem", "S_claim", "N_fam", "V_cite", "N_reassign", "S_litigation", "S_trend", "T_pend",
         "N_bcite", "N_ecite", "S_inv", "S_rej", "S_CIP", "TRL", "MRL", "V_TAM", "V_rev", "CAGR_tech",
         "S_juris", "S_sc", "P_cost", "T_market", "N_app", "N_comp", "S_mfg", "S_demand", "S_partner",
         "S_invest", "N_launch", "S_MA", "S_owner", "S_forecast", "S_NeedSeed"]


def run_config(out, with_model):
    cfg = {
        "portfolio": "sandisk_mini.jsonl",
        "gni": "gni.csv",
        "market": "market.json",
        "needs_corpus": "needs_corpus.jsonl",
        "aliases": "../config/aliases.csv",
        "suffixes": "../config/suffixes.txt",
        "patterns": "../config/patterns.txt",
        "broad_terms": "../config/broad_terms.txt",
        "params": "../config/params.toml",
        "profiles": "../config/profiles.toml",
        "evaluation_date": iso(EVAL),
        "profile": "Custom",
        "ingest_mode": "strict",
        "gate_bounds": {"top_n": 30, "min_items": 20, "max_items": 50},
    }
    if with_model:
        cfg["model"] = "model.json"
    else:
        cfg["await_selection"] = True
    return cfg


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def write_jsonl(path, rows):
    with open(path, "w") as f:
        for r in rows:
            f.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pp", required=True, help="path to the pp binary")
    ap.add_argument("--out", default="fixtures")
    args = ap.parse_args()
    out = args.out
    os.makedirs(out, exist_ok=True)
    rng = random.Random(SEED)

    records, planted = build_portfolio(rng)
    write_jsonl(os.path.join(out, "sandisk_mini.jsonl"), records)
    write_jsonl(os.path.join(out, "needs_corpus.jsonl"), needs_corpus())
    with open(os.path.join(out, "gni.csv"), "w") as f:
        f.write("iso3,gni_usd\n")
        for k in sorted(GNI):
            f.write(f"{k},{GNI[k]:.0f}\n")
    write_json(os.path.join(out, "market.json"), MARKET)

    pp = os.path.abspath(args.pp)
    tmp = tempfile.mkdtemp(prefix="ppfix-")
    try:
        boot = os.path.join(out, "bootstrap.json")
        write_json(boot, run_config(out, with_model=False))
        res = subprocess.run([pp, "--runs", tmp, "run", "--config", boot], check=True, capture_output=True, text=True)
        run_id = res.stdout.split()[0]
        rundir = os.path.join(tmp, run_id)
        with open(os.path.join(rundir, "categories.json")) as f:
            cats = json.load(f)["categories"]
        query_of = {m: c["key"] for c in cats for m in c["members"]}
        labels = []
        with open(os.path.join(rundir, "vectors.jsonl")) as f:
            for line in f:
                v = json.loads(line)
                pid = v["patent_id"]
                grade = 4 if pid in planted else grade_of(v)
                labels.append({"query_id": query_of[pid], "patent_id": pid, "grade": grade})
        labels.sort(key=lambda l: (l["query_id"], l["patent_id"]))
        write_jsonl(os.path.join(out, "labels.jsonl"), labels)
        subprocess.run([pp, "--runs", tmp, "train", "--run", run_id, "--labels", os.path.join(out, "labels.jsonl"),
                        "--out", os.path.join(out, "model.json")], check=True)
        os.remove(boot)
    finally:
        shutil.rmtree(tmp)

    write_json(os.path.join(out, "run.json"), run_config(out, with_model=True))
    by_id = {r["patent_id"]: r for r in records}
    write_json(os.path.join(out, "planted.json"), {
        "planted_patents": sorted(planted),
        "planted_need_entity": "SUNGWON ELECTRONICS",
        "planted_need_source_doc": "SW-10K-2025",
        "planted_need_key_terms": PLANTED_VOCAB,
        "dropped_by_legal_filter": sorted(r["patent_id"] for r in records
                                          if r["legal_status"] not in ("Granted", "Pending")
                                          or dt.date.fromisoformat(r["expiry_date"]) < EVAL),
        "record_count": len(by_id),
    })
    return 0


if __name__ == "__main__":
    sys.exit(main())
