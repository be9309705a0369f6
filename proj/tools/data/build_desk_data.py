#!/usr/bin/env python3
"""Assemble the desk-scale corpora and evaluation fixtures under data/.

Sources are fetched from the public package registries (PyPI via pip, npm via
`npm pack`), so no direct web access is needed:

  npm  @stdlib/datasets-sotu          US State of the Union addresses (public domain)
  npm  @stdlib/datasets-moby-dick     Moby Dick (public domain)
  npm  @stdlib/datasets-spam-assassin SpamAssassin public corpus (ham only is used)
  pip  pythonbible-kjv                King James Bible (public domain)
  pip  shakespeare==0.6               Shakespeare and Milton texts (public domain)
  pip  gensim==4.4.0                  test data: WS-353, SimLex-999, Google analogy
                                      file, a shortened English Wikipedia dump

Outputs (one document per line, UTF-8, gzip):
  data/corpus/desk-5mb.txt.gz    public-domain only (SOTU addresses)
  data/corpus/desk-50mb.txt.gz   everything above
  data/eval/wordsim353.tsv, data/eval/simlex999.tsv, data/eval/questions-words.txt
"""

import argparse
import bz2
import glob
import gzip
import html
import json
import os
import re
import subprocess
import sys
import tarfile
import zipfile

NPM = ["@stdlib/datasets-sotu@0.2.3", "@stdlib/datasets-moby-dick@0.2.3",
       "@stdlib/datasets-spam-assassin@0.2.3"]
PIP = ["pythonbible-kjv==0.0.2", "shakespeare==0.6", "gensim==4.4.0"]

SMALL_TARGET = 5 * 1024 * 1024


def fetch(cache):
    os.makedirs(cache, exist_ok=True)
    for spec in NPM:
        name = spec.rsplit("@", 1)[0].lstrip("@").replace("/", "-")
        if not glob.glob(os.path.join(cache, name + "-*.tgz")):
            subprocess.run(["npm", "pack", spec, "--silent"], cwd=cache, check=True)
    for spec in PIP:
        stem = spec.split("==")[0].replace("-", "_")
        if not (glob.glob(os.path.join(cache, stem + "-*")) or
                glob.glob(os.path.join(cache, spec.split("==")[0] + "-*"))):
            subprocess.run([sys.executable, "-m", "pip", "download", spec, "--no-deps",
                            "--timeout", "60", "-d", cache], check=True)


def one_of(cache, pattern):
    hits = sorted(glob.glob(os.path.join(cache, pattern)))
    if not hits:
        sys.exit(f"missing package archive matching {pattern} in {cache}")
    return hits[0]


def squash(text):
    return " ".join(text.split())


def sotu_documents(cache):
    with tarfile.open(one_of(cache, "stdlib-datasets-sotu-*.tgz")) as tar:
        members = sorted((m for m in tar.getmembers()
                          if m.name.startswith("package/data/") and m.name.endswith(".txt")),
                         key=lambda m: m.name)
        for m in members:
            text = tar.extractfile(m).read().decode("utf-8", "replace")
            for para in re.split(r"\n\s*\n", text):
                para = squash(para)
                if para:
                    yield para


def moby_documents(cache):
    with tarfile.open(one_of(cache, "stdlib-datasets-moby-dick-*.tgz")) as tar:
        text = tar.extractfile("package/data/data.txt").read().decode("utf-8", "replace")
    for para in re.split(r"\n\s*\n", text):
        para = squash(para)
        if para:
            yield para


def kjv_documents(cache):
    with zipfile.ZipFile(one_of(cache, "pythonbible_kjv-*.whl")) as z:
        src = z.read("pythonbible_kjv/plain_text_bible.py").decode("utf-8")
    body = src.split('"""', 2)[1]
    for line in body.splitlines():
        line = squash(line.replace("[", "").replace("]", ""))
        if line:
            yield line


def shakespeare_documents(cache):
    with tarfile.open(one_of(cache, "shakespeare-*.tar.gz")) as tar:
        members = sorted((m for m in tar.getmembers()
                          if m.isfile() and "/texts/" in m.name and m.name.endswith(".txt")
                          and not m.name.endswith("metadata.txt")),
                         key=lambda m: m.name)
        for m in members:
            text = tar.extractfile(m).read().decode("utf-8", "replace")
            for para in re.split(r"\n\s*\n", text):
                para = squash(para)
                if para:
                    yield para


WIKI_DROP = [re.compile(p, re.S) for p in (r"<ref[^>]*/>", r"<ref.*?</ref>", r"<!--.*?-->",
                                             r"\{\|.*?\|\}")]


def strip_wikitext(text):
    text = html.unescape(text)
    for pattern in WIKI_DROP:
        text = pattern.sub(" ", text)
    prev = None
    while prev != text:
        prev = text
        text = re.sub(r"\{\{[^{}]*\}\}", " ", text)
    text = re.sub(r"\[\[(?:File|Image|Category):[^\]]*\]\]", " ", text)
    text = re.sub(r"\[\[(?:[^\]|]*\|)?([^\]]*)\]\]", r"\1", text)
    text = re.sub(r"\[https?://\S+\s*([^\]]*)\]", r"\1", text)
    text = re.sub(r"<[^>]+>", " ", text)
    text = re.sub(r"'{2,}|={2,}", " ", text)
    return text


def wiki_documents(cache):
    with zipfile.ZipFile(one_of(cache, "gensim-*.whl")) as z:
        raw = z.read("gensim/test/test_data/"
                     "enwiki-latest-pages-articles1.xml-p000000010p000030302-shortened.bz2")
    xml = bz2.decompress(raw).decode("utf-8", "replace")
    for article in re.findall(r"<text[^>]*>(.*?)</text>", xml, re.S):
        for para in re.split(r"\n\s*\n", strip_wikitext(article)):
            para = squash(para)
            if len(para) > 40:
                yield para


def ham_documents(cache):
    with tarfile.open(one_of(cache, "stdlib-datasets-spam-assassin-*.tgz")) as tar:
        members = sorted((m for m in tar.getmembers()
                          if m.isfile() and "/data/" in m.name and "ham" in m.name
                          and m.name.endswith(".json")),
                         key=lambda m: m.name)
        for m in members:
            records = json.loads(tar.extractfile(m).read().decode("utf-8", "replace"))
            if isinstance(records, dict):
                records = [records]
            for rec in records:
                msg = rec.get("text", "")
                parts = msg.split("\n\n", 1)
                if len(parts) < 2:
                    continue
                body = parts[1]
                body = re.sub(r"<[^>]+>", " ", body)
                lines = [l for l in body.splitlines()
                         if not l.lstrip().startswith(">") and "http" not in l and "@" not in l]
                doc = squash(html.unescape(" ".join(lines)))
                if len(doc) > 40:
                    yield doc


def write_corpus(path, documents, limit=None):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    written = 0
    with gzip.open(path, "wt", encoding="utf-8", compresslevel=9) as out:
        for doc in documents:
            if limit is not None and written >= limit:
                break
            out.write(doc)
            out.write("\n")
            written += len(doc.encode("utf-8")) + 1
    print(f"{path}: {written / 1e6:.1f} MB uncompressed")


def chain(*gens):
    for g in gens:
        yield from g


def write_eval(cache, outdir):
    os.makedirs(outdir, exist_ok=True)
    with zipfile.ZipFile(one_of(cache, "gensim-*.whl")) as z:
        for src, dst in (("wordsim353.tsv", "wordsim353.tsv"),
                         ("simlex999.txt", "simlex999.tsv"),
                         ("questions-words.txt", "questions-words.txt")):
            with open(os.path.join(outdir, dst), "wb") as f:
                f.write(z.read("gensim/test/test_data/" + src))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cache", default=os.path.expanduser("~/.cache/hsgns-desk-data"))
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "..", "data"))
    args = ap.parse_args()

    fetch(args.cache)
    out = os.path.abspath(args.out)
    write_eval(args.cache, os.path.join(out, "eval"))
    write_corpus(os.path.join(out, "corpus", "desk-5mb.txt.gz"), sotu_documents(args.cache),
                 limit=SMALL_TARGET)
    write_corpus(os.path.join(out, "corpus", "desk-50mb.txt.gz"),
                 chain(sotu_documents(args.cache), kjv_documents(args.cache),
                       shakespeare_documents(args.cache), moby_documents(args.cache),
                       wiki_documents(args.cache), ham_documents(args.cache)))


if __name__ == "__main__":
    main()
