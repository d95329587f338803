"""Regenerate the offline fixture pack under fixtures/.

The pack is recorded by running the real pipeline against an in-process
simulation of the four remote services (media events, dataset catalog,
knowledge graph, wikifier). Every response lands in fixtures/cache with the
normal cache layout, so offline runs replay it exactly. The script then runs
the CLI offline to freeze the golden outputs.

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import json
import re
import shutil
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from xai_enrich import cli
from xai_enrich.cache import ResponseCache
from xai_enrich.concepts import KeywordConceptMapping, wikify
from xai_enrich.config import RunConfig
from xai_enrich.connectors import SourceQuery
from xai_enrich.evaluation import Section, section_ids
from xai_enrich.model import SourceKind, concept_label, enriched_from_dict, read_jsonl, record_to_dict, wiki_concept_id, write_jsonl, ExplanationRecord
from xai_enrich.pipeline import PipelineConfig, Sources, enrich_corpus
from xai_enrich.transport import HttpRequest

ROOT = Path(__file__).resolve().parents[1]
FIX = ROOT / "fixtures"
RECORDED_AT = datetime(2021, 4, 1, tzinfo=timezone.utc)

PERSON = ["Person", "human"]
PLACE = ["Place", "Country"]
ORG = ["Organisation", "Company"]

# ------------------------------------------------------------------ keyword mapping

KEYWORD_ROWS = [
    ("Car Sales Demand", ["Car", "Demand"]),
    ("New Car Sales", ["Car", "Sales"]),
    ("Vehicle Sales", ["Vehicle"]),
    ("Car Demand", ["Car", "Demand"]),
    ("Automotive Industry", ["Automotive Industry"]),
    ("Global GDP Projection", ["Gross Domestic Product", "Gross World Product"]),
    ("Global Economic Outlook", ["Economy", "World economy"]),
    ("Economic Forecast", ["Forecasting", "Economy"]),
    ("Unemployment Rate", ["Unemployment"]),
    ("Unemployment Numbers", ["Unemployment"]),
    ("Unemployment Report", ["Unemployment"]),
    ("Employment Growth", ["Employment"]),
    ("Long-term Unemployment", ["Unemployment"]),
    ("Purchasing Managers' Index", ["Manager (Gaelic games)"]),
]

# what the wikifier answers for each keyword: (label, pageRank); entries below
# 0.8 of the top score fall under the default salience threshold
KEYWORD_WIKIFICATION = {
    "Car Sales Demand": [("Car", 1.0), ("Demand", 0.95), ("Sales", 0.4)],
    "New Car Sales": [("Car", 1.0), ("Sales", 0.9)],
    "Vehicle Sales": [("Vehicle", 1.0), ("Sales", 0.5)],
    "Car Demand": [("Car", 1.0), ("Demand", 0.9)],
    "Automotive Industry": [("Automotive Industry", 1.0)],
    "Global GDP Projection": [("Gross Domestic Product", 1.0), ("Gross World Product", 0.85), ("Forecasting", 0.3)],
    "Global Economic Outlook": [("Economy", 1.0), ("World economy", 0.9), ("Forecasting", 0.5)],
    "Economic Forecast": [("Forecasting", 1.0), ("Economy", 0.95)],
    "Unemployment Rate": [("Unemployment", 1.0)],
    "Unemployment Numbers": [("Unemployment", 1.0)],
    "Unemployment Report": [("Unemployment", 1.0)],
    "Employment Growth": [("Employment", 1.0)],
    "Long-term Unemployment": [("Unemployment", 1.0)],
    "Purchasing Managers' Index": [("Manager (Gaelic games)", 1.0)],
}

KEYWORD_THEMES = {
    "Car Sales Demand": {"auto"}, "New Car Sales": {"auto"}, "Vehicle Sales": {"auto"},
    "Car Demand": {"auto"}, "Automotive Industry": {"auto"},
    "Global GDP Projection": {"macro"}, "Global Economic Outlook": {"macro"},
    "Economic Forecast": {"macro"}, "Purchasing Managers' Index": {"macro"},
    "Unemployment Rate": {"labour"}, "Unemployment Numbers": {"labour"},
    "Unemployment Report": {"labour"}, "Employment Growth": {"labour"},
    "Long-term Unemployment": {"labour"},
}

# ------------------------------------------------------------------ lexicon
# label -> (class names, surface forms, pageRank, themes)
LEXICON = {
    "Car": ([], ["car", "cars"], 1.0, {"auto"}),
    "Demand": ([], ["demand"], 1.0, {"auto", "macro"}),
    "Sales": ([], ["sales"], 1.0, {"auto"}),
    "Vehicle": ([], ["vehicle", "vehicles"], 1.0, {"auto"}),
    "Electric vehicle": ([], ["electric vehicle", "electric vehicles"], 1.0, {"auto"}),
    "Automotive Industry": ([], ["automotive industry", "automotive sector", "automaker", "automakers"], 1.0, {"auto"}),
    "Gross Domestic Product": ([], ["gross domestic product", "GDP"], 1.0, {"macro"}),
    "Gross World Product": ([], ["gross world product", "world product"], 1.0, {"macro"}),
    "Economy": ([], ["economy", "economic"], 1.0, {"macro"}),
    "World economy": ([], ["world economy", "global economy"], 1.0, {"macro"}),
    "Forecasting": ([], ["forecast", "forecasts", "forecasting", "projection", "projections"], 1.0, {"macro"}),
    "Unemployment": ([], ["unemployment", "unemployed", "jobless"], 1.0, {"labour"}),
    "Employment": ([], ["employment", "job growth", "jobs"], 1.0, {"labour"}),
    "Labour market": ([], ["labour market", "labor market"], 1.0, {"labour"}),
    "Manufacturing": ([], ["manufacturing"], 1.0, {"macro", "auto"}),
    "Semiconductor": ([], ["semiconductor", "semiconductors", "chip", "chips"], 1.0, {"auto"}),
    "Supply chain": ([], ["supply chain", "supply chains", "supply"], 1.0, {"auto", "macro"}),
    "Inflation": ([], ["inflation", "consumer prices"], 1.0, {"macro"}),
    "Interest rate": ([], ["interest rate", "interest rates"], 1.0, {"macro"}),
    "Central bank": ([], ["central bank"], 1.0, {"macro"}),
    "Bank": ([], ["bank", "banking"], 1.0, {"finance"}),
    "Hydrogen fuel cell": ([], ["hydrogen fuel cell", "fuel cell", "fuel cells", "hydrogen"], 1.0, {"auto"}),
    "Battery": ([], ["battery", "batteries"], 1.0, {"auto"}),
    "Carsharing": ([], ["carsharing", "car sharing"], 1.0, {"auto"}),
    "Recession": ([], ["recession"], 1.0, {"macro"}),
    "Statistics": ([], ["statistics", "statistical"], 0.5, set()),
    "Hurling": ([], ["hurling"], 1.0, {"sport"}),
    "Gaelic games": ([], ["gaelic games"], 1.0, {"sport"}),
    "Manager (Gaelic games)": ([], ["manager", "managers"], 1.0, {"sport"}),
    "Angela Merkel": (PERSON, ["angela merkel", "merkel"], 1.0, set()),
    "Elon Musk": (PERSON, ["elon musk", "musk"], 1.0, set()),
    "Joe Biden": (PERSON, ["joe biden", "biden"], 1.0, set()),
    "Christine Lagarde": (PERSON, ["christine lagarde", "lagarde"], 1.0, set()),
    "Kristalina Georgieva": (PERSON, ["kristalina georgieva", "georgieva"], 1.0, set()),
    "Edward Fulton Denison": (PERSON, ["edward fulton denison", "denison"], 1.0, set()),
    "Kathleen Wilson-Thompson": (PERSON, ["kathleen wilson-thompson"], 1.0, set()),
    "Germany": (PLACE, ["germany", "german"], 1.0, set()),
    "China": (PLACE, ["china", "chinese"], 1.0, set()),
    "India": (PLACE, ["india"], 1.0, set()),
    "United States": (PLACE, ["united states", "u.s."], 1.0, set()),
    "Europe": (PLACE, ["europe", "european"], 1.0, set()),
    "Ireland": (PLACE, ["ireland", "irish"], 1.0, set()),
    "Vietnam": (PLACE, ["vietnam", "vietnamese"], 1.0, set()),
    "Berlin": (PLACE, ["berlin"], 1.0, set()),
    "Tesla, Inc.": (ORG, ["tesla"], 1.0, {"auto"}),
    "Volkswagen": (ORG, ["volkswagen"], 1.0, {"auto"}),
    "Eurostat": (["government agency"], ["eurostat"], 1.0, {"labour", "macro"}),
    "International Monetary Fund": (ORG, ["international monetary fund", "IMF"], 1.0, {"macro"}),
    "Gaelic Athletic Association": (ORG, ["gaelic athletic association", "GAA"], 1.0, {"sport"}),
    "World Bank": (ORG, ["world bank"], 1.0, {"macro"}),
    "International Labour Organization": (ORG, ["international labour organization", "ILO"], 1.0, {"labour"}),
}

# ------------------------------------------------------------------ sources
# media events: uri, title, summary, date, wgt, concepts ((label, er-type) or None: wikify), themes
MEDIA = [
    ("eng-7001", "Car sales rebound as demand recovers",
     "Car sales in Germany rose in March as consumer demand recovered; Volkswagen reported strong orders across the automotive industry.",
     "2021-03-12", 88,
     [("Car", "wiki"), ("Demand", "wiki"), ("Sales", "wiki"), ("Automotive Industry", "wiki"), ("Germany", "loc"), ("Volkswagen", "org")],
     {"auto"}),
    ("eng-7002", "Chip shortage curbs new car deliveries",
     "A global semiconductor shortage is disrupting the supply chain of carmakers in China and beyond.",
     "2021-02-20", 80,
     [("Car", "wiki"), ("Semiconductor", "wiki"), ("Supply chain", "wiki"), ("Automotive Industry", "wiki"), ("China", "loc")],
     {"auto"}),
    ("eng-7003", "Electric vehicle registrations hit a record",
     "Electric vehicle sales in Europe reached a record share; Tesla chief Elon Musk welcomed the figures.",
     "2021-01-28", 77,
     [("Electric vehicle", "wiki"), ("Vehicle", "wiki"), ("Sales", "wiki"), ("Europe", "loc"), ("Tesla, Inc.", "org"), ("Elon Musk", "person")],
     {"auto"}),
    ("eng-7004", "Unemployment rate falls to 6.2 percent",
     "The unemployment rate in the United States fell as employment picked up, President Joe Biden said.",
     "2021-03-05", 91,
     [("Unemployment", "wiki"), ("Employment", "wiki"), ("Labour market", "wiki"), ("United States", "loc"), ("Joe Biden", "person")],
     {"labour"}),
    ("eng-7005", "Euro area unemployment holds steady",
     "Eurostat said unemployment was unchanged while the European economy stabilised.",
     "2021-03-02", 70,
     [("Unemployment", "wiki"), ("Economy", "wiki"), ("Eurostat", "org"), ("Europe", "loc")],
     {"labour", "macro"}),
    ("eng-7006", "IMF raises its global growth forecast",
     "The International Monetary Fund lifted its forecast for the world economy and GDP growth, Kristalina Georgieva said.",
     "2021-01-26", 85,
     [("Economy", "wiki"), ("World economy", "wiki"), ("Forecasting", "wiki"), ("Gross Domestic Product", "wiki"),
      ("International Monetary Fund", "org"), ("Kristalina Georgieva", "person")],
     {"macro"}),
    ("eng-7007", "GDP contracts in the first quarter",
     "Gross domestic product in Germany shrank, raising fears of a recession in the economy.",
     "2021-03-30", 83,
     [("Gross Domestic Product", "wiki"), ("Economy", "wiki"), ("Recession", "wiki"), ("Germany", "loc")],
     {"macro"}),
    ("eng-7008", "Central bank keeps rates on hold amid inflation fears",
     "The central bank left interest rates unchanged as inflation edged up, Christine Lagarde told reporters.",
     "2021-03-11", 79,
     [("Interest rate", "wiki"), ("Inflation", "wiki"), ("Central bank", "wiki"), ("Economy", "wiki"), ("Christine Lagarde", "person")],
     {"macro"}),
    ("eng-7009", "Automakers bet on hydrogen",
     "Several automakers unveiled hydrogen fuel cell cars as the automotive industry diversifies vehicle platforms.",
     "2021-02-15", 65,
     [("Automotive Industry", "wiki"), ("Hydrogen fuel cell", "wiki"), ("Vehicle", "wiki"), ("Car", "wiki")],
     {"auto"}),
    ("eng-7010", "Long-term unemployed struggle to return to work",
     "Long-term unemployment in Ireland remains high despite a recovering labour market.",
     "2021-02-08", 60,
     [("Unemployment", "wiki"), ("Labour market", "wiki"), ("Ireland", "loc")],
     {"labour"}),
    ("eng-7011", "County managers meet ahead of hurling season",
     "Hurling managers met the Gaelic Athletic Association in Ireland to plan the season.",
     "2021-01-19", 55,
     [("Manager (Gaelic games)", "wiki"), ("Hurling", "wiki"), ("Gaelic Athletic Association", "org"), ("Ireland", "loc")],
     {"sport"}),
    ("eng-7012", "Manufacturing PMI signals expansion",
     "Purchasing managers report rising orders in manufacturing as the economy recovers.",
     "2021-03-01", 72, None, {"macro"}),
    ("eng-7013", "Used car prices soar as demand outstrips supply",
     "Used car prices climbed as demand outpaced supply chains, adding to inflation.",
     "2021-03-18", 74,
     [("Car", "wiki"), ("Demand", "wiki"), ("Supply chain", "wiki"), ("Inflation", "wiki")],
     {"auto", "macro"}),
    ("eng-7014", "World economy outlook dims on supply disruptions",
     "Forecasters trimmed projections for the world economy as supply chain disruptions persist.",
     "2021-02-24", 68,
     [("World economy", "wiki"), ("Economy", "wiki"), ("Supply chain", "wiki"), ("Forecasting", "wiki")],
     {"macro"}),
    ("eng-7015", "Job growth beats expectations",
     "Employment grew faster than forecast in the United States, lowering unemployment.",
     "2021-03-06", 81,
     [("Employment", "wiki"), ("Labour market", "wiki"), ("Unemployment", "wiki"), ("United States", "loc")],
     {"labour"}),
    ("eng-7016", "Car sharing demand grows in cities",
     "Carsharing operators in Berlin see rising demand for shared cars.",
     "2021-01-22", 50,
     [("Carsharing", "wiki"), ("Car", "wiki"), ("Demand", "wiki"), ("Berlin", "loc")],
     {"auto"}),
    ("eng-7017", "Gross world product rebounds",
     "Gross world product and national GDP figures point to a rebound in the world economy.",
     "2021-02-11", 58,
     [("Gross World Product", "wiki"), ("Gross Domestic Product", "wiki"), ("World economy", "wiki")],
     {"macro"}),
    ("eng-7018", "Vehicle sales slump in Asia",
     "Vehicle sales across China and India slumped as the automotive industry faced weak demand.",
     "2021-01-30", 62, None, {"auto"}),
    ("eng-7019", "Economists revise their unemployment forecast",
     "Economists revised the unemployment forecast as the economy reopened.",
     "2021-02-27", 66,
     [("Unemployment", "wiki"), ("Forecasting", "wiki"), ("Economy", "wiki")],
     {"labour", "macro"}),
    ("eng-7020", "New Gaelic games managers appointed",
     "Two counties in Ireland appointed new managers for Gaelic games.",
     "2021-03-21", 40,
     [("Manager (Gaelic games)", "wiki"), ("Gaelic games", "wiki"), ("Ireland", "loc")],
     {"sport"}),
]

# datasets: id, title, description, publisher, modified, themes
DATASETS = [
    ("une_rt_m", "Unemployment by sex and age - monthly data",
     "Monthly unemployment rates and numbers of unemployed persons in the labour market.", "Eurostat", "2021-03-31", {"labour"}),
    ("une_ltu_a", "Long-term unemployment by sex - annual data",
     "Share of long-term unemployment among the unemployed.", "Eurostat", "2021-02-15", {"labour"}),
    ("lfsi_emp_a", "Employment rates by sex and age",
     "Employment rates and employment growth across member states.", "Eurostat", "2021-01-20", {"labour"}),
    ("nama_10_gdp", "Gross domestic product at market prices",
     "GDP and main components describing the output of the economy.", "Eurostat", "2021-03-10", {"macro"}),
    ("road_eqr_carpda", "New passenger car registrations by type of motor energy",
     "Registrations of new cars, including electric vehicles, by fuel type.", "Eurostat", "2021-02-01", {"auto"}),
    ("sts_inpr_auto", "Production in industry - manufacture of motor vehicles",
     "Index of vehicle production in the automotive industry and related manufacturing.", "Eurostat", "2021-03-15", {"auto"}),
    ("teibs010", "Economic sentiment indicator",
     "Composite indicator used in forecasting the economy.", "European Commission", "2021-03-29", {"macro"}),
    ("prc_hicp_manr", "HICP - monthly annual rate of change",
     "Harmonised index of consumer prices measuring inflation.", "Eurostat", "2021-03-17", {"macro"}),
    ("irt_st_m", "Money market interest rates - monthly data",
     "Interest rates set by the central bank and interbank markets.", "European Central Bank", "2021-03-05", {"macro"}),
    ("sts_trtu_m", "Retail trade volume",
     "Turnover and sales volume in retail trade reflecting consumer demand.", "Eurostat", "2021-03-04", {"retail"}),
    ("weo_extract", "World economic outlook projections extract",
     "Projections for the world economy and gross world product used in forecasting.", "International Monetary Fund", "2021-01-26", {"macro"}),
    ("tran_r_elvehst", "Stock of alternative fuel vehicles",
     "Electric vehicles and hydrogen fuel cell cars in the vehicle fleet.", "European Environment Agency", "2021-02-22", {"auto"}),
    ("sport_gaelic", "Participation in Gaelic games",
     "Survey of clubs, managers and players in hurling and other Gaelic games.", "Sport Ireland", "2020-11-30", {"sport"}),
]

# kg entities: id, name, description, article, resultScore, topics (concept labels), themes
KG = [
    ("kg:/m/0faurecia", "Faurecia", "Automotive supplier",
     "Faurecia is an automotive industry supplier of car interiors and vehicle emission systems.", 905.0,
     {"Automotive Industry", "Car", "Vehicle"}, {"auto"}),
    ("kg:/g/rivian", "Rivian Automotive Inc.", "Electric vehicle manufacturer",
     "Rivian designs electric vehicles for the automotive industry.", 960.0,
     {"Electric vehicle", "Automotive Industry", "Vehicle"}, {"auto"}),
    ("kg:/g/polestar", "Polestar", "Car brand",
     "Polestar builds electric vehicle performance cars.", 480.0,
     {"Electric vehicle", "Car", "Automotive Industry"}, {"auto"}),
    ("kg:/g/vinfast", "VinFast", "Automobile manufacturer",
     "VinFast is a Vietnamese automaker producing cars and electric vehicles.", 300.0,
     {"Car", "Electric vehicle", "Automotive Industry"}, {"auto"}),
    ("kg:/m/plugpower", "Plug Power", "Hydrogen fuel cell company",
     "Plug Power develops hydrogen fuel cell systems that replace conventional batteries in vehicles.", 350.0,
     {"Hydrogen fuel cell", "Battery", "Vehicle"}, {"auto"}),
    ("kg:/g/flinkster", "Flinkster", "Carsharing company",
     "Flinkster is a carsharing service in Germany offering cars for short-term rental.", 200.0,
     {"Carsharing", "Car", "Demand"}, {"auto"}),
    ("kg:/m/bofa", "Bank of America", "Bank",
     "Bank of America is a banking institution active across the economy, sensitive to interest rates.", 900.0,
     {"Bank", "Economy", "Interest rate"}, {"finance"}),
    ("kg:/m/deutschebank", "Deutsche Bank", "Bank",
     "Deutsche Bank is a German bank whose results track the economy.", 850.0,
     {"Bank", "Economy", "Gross Domestic Product"}, {"finance"}),
    ("kg:/m/denison", "Edward Fulton Denison", "American economist",
     "Edward Fulton Denison pioneered the measurement of gross domestic product in the United States.", 400.0,
     {"Gross Domestic Product", "Economy"}, {"person"}),
    ("kg:/g/wilsonthompson", "Kathleen Wilson-Thompson", "Business executive",
     "Kathleen Wilson-Thompson is an independent director at Tesla and a human resources executive overseeing employment.", 300.0,
     {"Employment", "Automotive Industry"}, {"person"}),
    ("kg:/m/tesla", "Tesla, Inc.", "Automotive company",
     "Tesla makes electric vehicles and batteries and leads the automotive industry in car software.", 950.0,
     {"Electric vehicle", "Car", "Automotive Industry", "Battery"}, {"auto"}),
    ("kg:/m/eurostat", "Eurostat", "Statistical office",
     "Eurostat publishes unemployment statistics and gross domestic product figures for the economy of Europe.", 500.0,
     {"Unemployment", "Gross Domestic Product", "Economy", "Employment"}, {"labour", "macro"}),
    ("kg:/m/ilo", "International Labour Organization", "United Nations agency",
     "The ILO sets labour market standards on employment and unemployment.", 450.0,
     {"Employment", "Unemployment", "Labour market"}, {"labour"}),
    ("kg:/m/worldbank", "World Bank", "International financial institution",
     "The World Bank publishes projections for the world economy and gross domestic product.", 700.0,
     {"World economy", "Gross Domestic Product", "Forecasting", "Economy"}, {"macro"}),
    ("kg:/m/gaa", "Gaelic Athletic Association", "Sports organization",
     "The GAA governs hurling and Gaelic games and their managers in Ireland.", 380.0,
     {"Gaelic games", "Hurling", "Manager (Gaelic games)"}, {"sport"}),
    ("kg:/m/vw", "Volkswagen", "Car manufacturer",
     "Volkswagen is a German automaker producing cars and commercial vehicles.", 880.0,
     {"Car", "Automotive Industry", "Vehicle"}, {"auto"}),
]

RECORDS = [
    ("P01-2021-01", "P01", "2021-01", ["Car Sales Demand", "Unemployment Rate", "Global GDP Projection"]),
    ("P01-2021-02", "P01", "2021-02", ["Car Sales Demand", "Unemployment Rate"]),
    ("P01-2021-03", "P01", "2021-03", ["New Car Sales", "Economic Forecast"]),
    ("P02-2021-01", "P02", "2021-01", ["Vehicle Sales", "Automotive Industry"]),
    ("P02-2021-02", "P02", "2021-02", ["Automotive Industry"]),
    ("P02-2021-03", "P02", "2021-03", ["Car Demand", "Employment Growth"]),
    ("P03-2021-01", "P03", "2021-01", ["Global Economic Outlook", "Unemployment Numbers"]),
    ("P03-2021-02", "P03", "2021-02", ["Global GDP Projection", "Economic Forecast"]),
    ("P03-2021-03", "P03", "2021-03", ["Unemployment Report", "Long-term Unemployment"]),
    ("P04-2021-01", "P04", "2021-01", ["Purchasing Managers' Index", "Car Sales Demand"]),
    ("P04-2021-02", "P04", "2021-02", ["Purchasing Managers' Index"]),
    ("P04-2021-03", "P04", "2021-03", ["Employment Growth", "Vehicle Sales"]),
]

# inspection texts exercised by tests and the README
EXTRA_WIKIFY_TEXTS = [
    "The quick brown fox jumps over the lazy dog",
    "Angela Merkel and Elon Musk discussed car demand in Germany",
]

# stand-alone connector queries exercised by the tests: (kind, concept labels, limit)
EXTRA_QUERIES = [
    ("media_event", ["Automotive Industry"], 3),
    ("dataset", ["Unemployment"], 2),
    ("dataset", ["Quantum chromodynamics"], 5),
    ("kg_entity", ["Automotive Industry"], 3),
    ("kg_entity", ["Economy"], 3),
]

# ------------------------------------------------------------------ simulation


def cid(label: str) -> str:
    return wiki_concept_id(label)


def _surface_regex(surface: str) -> re.Pattern:
    flags = 0 if surface.isupper() else re.IGNORECASE
    return re.compile(r"(?<![\w-])" + re.escape(surface) + r"(?![\w-])", flags)


_PATTERNS = {label: [_surface_regex(s) for s in spec[1]] for label, spec in LEXICON.items()}


def _annotation(label: str, pr: float, spans: list[tuple[int, int]]) -> dict:
    classes = LEXICON[label][0] if label in LEXICON else []
    return {
        "title": label,
        "url": cid(label),
        "lang": "en",
        "pageRank": pr,
        "dbPediaTypes": classes,
        "wikiDataClasses": [],
        "support": [{"chFrom": a, "chTo": b - 1} for a, b in spans],
    }


def simulate_wikifier(text: str) -> dict:
    if text in KEYWORD_WIKIFICATION:
        anns = []
        for label, pr in KEYWORD_WIKIFICATION[text]:
            first = label.split()[0].lower()
            idx = text.lower().find(first[:4])
            span = (idx, idx + len(first[:4])) if idx >= 0 else (0, len(text))
            anns.append(_annotation(label, pr, [span]))
        return {"annotations": anns}
    found: dict[str, list[tuple[int, int]]] = {}
    for label, patterns in _PATTERNS.items():
        for pat in patterns:
            for m in pat.finditer(text):
                found.setdefault(label, []).append(m.span())
    anns = [_annotation(label, LEXICON[label][2], sorted(set(spans))) for label, spans in sorted(found.items())]
    return {"annotations": anns}


def _mentions(term: str, *texts: str) -> bool:
    return bool(_surface_regex(term).search(" ".join(texts)))


def simulate_media(body: dict) -> dict:
    terms, op, limit = body["keyword"], body["keywordOper"], body["eventsCount"]
    hits = []
    for uri, title, summary, date, wgt, concepts, _ in MEDIA:
        labels = {c for c, _ in concepts} if concepts else set()
        matched = [t for t in terms if t in labels or _mentions(t, title, summary)]
        ok = len(matched) == len(terms) if op == "and" else bool(matched)
        if ok:
            hits.append((-len(matched), -wgt, uri))
    hits.sort()
    results = []
    by_uri = {m[0]: m for m in MEDIA}
    for _, _, uri in hits[:limit]:
        _, title, summary, date, wgt, concepts, _ = by_uri[uri]
        ev = {"uri": uri, "title": {"eng": title}, "summary": {"eng": summary}, "eventDate": date, "wgt": wgt}
        if concepts is not None:
            ev["concepts"] = [
                {"uri": cid(label), "label": {"eng": label}, "type": ctype, "score": 100 - 5 * i}
                for i, (label, ctype) in enumerate(concepts)
            ]
        results.append(ev)
    return {"events": {"results": results, "totalResults": len(hits)}}


def _split_query(q: str) -> tuple[list[str], str]:
    op = "and" if " AND " in q else "or"
    parts = re.split(r" (?:AND|OR) ", q)
    return [p.strip().strip('"') for p in parts if p.strip()], op


def simulate_catalog(params: dict) -> dict:
    terms, op = _split_query(params["q"])
    hits = []
    for ds_id, title, desc, publisher, modified, _ in DATASETS:
        matched = [t for t in terms if _mentions(t, title, desc)]
        ok = len(matched) == len(terms) if op == "and" else bool(matched)
        if ok:
            hits.append((-len(matched), ds_id))
    hits.sort()
    by_id = {d[0]: d for d in DATASETS}
    results = []
    for _, ds_id in hits[: int(params["limit"])]:
        _, title, desc, publisher, modified, _ = by_id[ds_id]
        results.append({
            "id": ds_id,
            "title": {"en": title},
            "description": {"en": desc},
            "publisher": {"name": publisher},
            "modified": modified,
        })
    return {"result": {"count": len(hits), "results": results}}


def simulate_kg(params: dict) -> dict:
    term = params["query"]
    hits = []
    for eid, name, desc, article, score, topics, _ in KG:
        if term in topics or _mentions(term, name, desc, article):
            hits.append((-score, eid))
    hits.sort()
    by_id = {k[0]: k for k in KG}
    items = []
    for _, eid in hits[: int(params["limit"])]:
        _, name, desc, article, score, _, _ = by_id[eid]
        items.append({
            "@type": "EntitySearchResult",
            "result": {
                "@id": eid,
                "name": name,
                "@type": ["Thing"],
                "description": desc,
                "detailedDescription": {"articleBody": article},
            },
            "resultScore": score,
        })
    return {"@context": {}, "@type": "ItemList", "itemListElement": items}


class SimulatedTransport:
    def __init__(self):
        self.calls: list[tuple[str, HttpRequest]] = []

    def send(self, source: str, request: HttpRequest) -> bytes:
        self.calls.append((source, request))
        if source == "wikifier":
            doc = simulate_wikifier(request.form["text"])
        elif source == "media_event":
            doc = simulate_media(request.json_body)
        elif source == "dataset":
            doc = simulate_catalog(dict(request.params))
        elif source == "kg_entity":
            doc = simulate_kg(dict(request.params))
        else:
            raise ValueError(source)
        return (json.dumps(doc, indent=1, ensure_ascii=False) + "\n").encode("utf-8")


# ------------------------------------------------------------------ judgments

_THEMES_BY_ID = {
    **{m[0]: m[6] for m in MEDIA},
    **{d[0]: d[5] for d in DATASETS},
    **{k[0]: k[6] for k in KG},
}


def explanation_themes(rec: ExplanationRecord) -> set[str]:
    out: set[str] = set()
    for kw in rec.feature_keywords:
        out |= KEYWORD_THEMES[kw.phrase]
    return out


def judge(rec: ExplanationRecord, section: Section, entry_id: str) -> bool:
    if section is Section.MEDIA_KEYWORDS_CONCEPTS:
        themes = LEXICON[concept_label(entry_id)][3]
    else:
        themes = _THEMES_BY_ID[entry_id]
    return bool(themes & explanation_themes(rec))


# ------------------------------------------------------------------ build


def main() -> int:
    if (FIX / "cache").exists():
        shutil.rmtree(FIX / "cache")
    FIX.mkdir(exist_ok=True)

    write_jsonl(FIX / "table1.jsonl", (
        {"keyword": kw, "concepts": [{"id": cid(c), "label": c, "classification": "other"} for c in concepts]}
        for kw, concepts in KEYWORD_ROWS
    ))
    records = [ExplanationRecord(eid, pid, period, tuple(kws)) for eid, pid, period, kws in RECORDS]
    write_jsonl(FIX / "explanations.jsonl", (record_to_dict(r) for r in records))

    run = RunConfig(cache_dir=str(FIX / "cache"), fixture_dirs=(), offline=False,
                    ee_api_key="fixture", kg_api_key="fixture", wikifier_user_key="fixture", parallelism=1)
    transport = SimulatedTransport()
    sources = Sources.from_run_config(run, transport=transport)
    sources.wikifier.fetcher.clock = lambda: RECORDED_AT
    for kw, _ in KEYWORD_ROWS:
        wikify(kw, run.min_salience, client=sources.wikifier)
    for text in EXTRA_WIKIFY_TEXTS:
        wikify(text, run.min_salience, client=sources.wikifier)
    connectors = {"media_event": sources.media, "dataset": sources.datasets, "kg_entity": sources.kg}
    for kind, labels, limit in EXTRA_QUERIES:
        connectors[kind].query(SourceQuery(tuple(cid(l) for l in labels), SourceKind(kind), limit))
    mapping = KeywordConceptMapping.from_jsonl(FIX / "table1.jsonl")
    result = enrich_corpus(records, mapping, PipelineConfig.from_run_config(run), sources)
    assert not result.errors, result.errors

    rows = []
    for e in result.enriched:
        for section in Section:
            for entry_id in section_ids(e, section):
                rows.append({
                    "explanation_id": e.explanation.explanation_id,
                    "candidate_id": entry_id,
                    "section": section.value,
                    "relevant": judge(e.explanation, section, entry_id),
                })
    write_jsonl(FIX / "judgments.jsonl", rows)

    stats = ResponseCache(FIX / "cache").stats()
    manifest = {
        "recorded_at": RECORDED_AT.isoformat(),
        "cache_entries": stats,
        "candidates": {"media_event": len(MEDIA), "dataset": len(DATASETS), "kg_entity": len(KG)},
        "explanations": len(records),
        "judgments": len(rows),
    }
    (FIX / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")

    golden = FIX / "golden"
    if golden.exists():
        shutil.rmtree(golden)
    scratch = tempfile.mkdtemp(prefix="xai-enrich-")
    common = ["--offline", "--cache-dir", scratch, "--fixtures", str(FIX / "cache")]
    rc = cli.main(["enrich", "--input", str(FIX / "explanations.jsonl"), "--mapping", str(FIX / "table1.jsonl"),
                   "--out", str(golden / "enriched.jsonl"), *common])
    assert rc == 0, rc
    rc = cli.main(["evaluate", "--enriched", str(golden / "enriched.jsonl"), "--label", "semantic",
                   "--judgments", str(FIX / "judgments.jsonl"), "--k", "1,3", "--report-dir", str(golden),
                   "--no-figure"])
    assert rc == 0, rc
    shutil.rmtree(scratch, ignore_errors=True)
    print(json.dumps(manifest, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
