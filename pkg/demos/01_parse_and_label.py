"""
Reading srsENB logs and labelling connection outcomes
=====================================================

A run log is a list of timestamped records. Records that share a
millisecond timestamp form one event group, and the whole file gets a
binary label from whether the RRC setup completed in time.
"""

import tempfile
from pathlib import Path

from fuzzsem import groundtruth, ingest

# Two line shapes occur: a plain record and a PHY record that also carries
# a subframe number and a channel name.
print(ingest.parse_line("17:52:25.246 [RLC ] Info DRB1 Tx SDU"))
print(ingest.parse_line("17:52:26.094 [PHY1] Info [05788] PDSCH: l_crb=1, harq=0, ..."))

# Content is reduced to alphanumeric tokens before embedding.
print(repr(ingest.normalize_content("l_crb=1, harq=0, snr= 22.1 dB")))

# A tiny hand-written run that crosses midnight. The hex dump under the
# second record is folded into that record's content.
log = """\
23:59:59.500 [RRC ] Info Rx UL CCCH rrcConnectionRequest rnti=0x46
23:59:59.500 [MAC ] Info SCHED: DL tx rnti=0x46, pid=0
             0000: 40 01 0a 1b
00:00:03.020 [RRC ] Info Rx UL DCCH rrcConnectionSetupComplete rnti=0x46
"""
path = Path(tempfile.mkdtemp()) / "wrap.log"
path.write_text(log)
doc = ingest.parse_file(path)
for g in doc.groups:
    print(f"{g.elapsed_s:>3}s  {g.n_records} record(s)  {g.text}")

# The keyword arrives 3.52 s after the first record, so the run passes with
# a 3 s setup duration. A 3 s timeout would have failed it.
print(groundtruth.label_outcome(doc))
print(groundtruth.label_outcome(doc, timeout_s=3))
