"""Journal selection from citation events.

Builds a small metadata set in memory, counts proceedings citations into the
2007-2021 window, and applies the selection thresholds: strictly more than 50
citations AND at least 100 papers.
"""

import random

from mathdex import CitationEvent, JournalRecord, count_icm_citations, select_journals

rng = random.Random(0)

journals = [
    JournalRecord("annals", "Annals of Examples", papers_2007_2021=450),
    JournalRecord("inventiones-like", "Inventive Mathematics", papers_2007_2021=800),
    JournalRecord("small-venue", "Small Venue", papers_2007_2021=40),
    JournalRecord("quiet-journal", "Quiet Journal", papers_2007_2021=500),
]

# citation events: (citing proceeding, cited journal, cited paper's year)
events = []
for _ in range(180):
    events.append(CitationEvent("proc-a", "annals", rng.randint(2005, 2023)))
for _ in range(70):
    events.append(CitationEvent("proc-b", "inventiones-like", rng.randint(2007, 2021)))
for _ in range(120):
    events.append(CitationEvent("proc-a", "small-venue", 2010))  # tiny venue, many citations
for _ in range(50):
    events.append(CitationEvent("proc-c", "quiet-journal", 2015))  # exactly 50: not enough

counts = count_icm_citations(events)  # inclusive window, defaults 2007..2021
print("citations inside the window:")
for journal_id, count in sorted(counts.items()):
    print(f"  {journal_id:18s} {count}")

with_counts = [
    JournalRecord(
        j.journal_id,
        j.name,
        papers_2007_2021=j.papers_2007_2021,
        icm_citations_2007_2021=counts.get(j.journal_id, 0),
    )
    for j in journals
]

selected = select_journals(with_counts, citation_threshold=50, min_papers=100)
print("\nselected journals:", sorted(selected))
print("note: 'small-venue' fails the paper minimum, 'quiet-journal' sits exactly")
print("on the citation threshold and > is strict, so both are excluded.")
