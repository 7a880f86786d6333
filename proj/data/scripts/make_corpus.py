#!/usr/bin/env python3
"""Assemble the desk-scale protein corpus used by the acceptance suite.

Sources (all redistributed as test data inside PyPI wheels):
  * pyskani 0.2.0    tests/e.coli-K12.fasta.gz     E. coli K-12 genome
  * pyhmmer 0.12.3   tests/data/seqs/938293.PRJEB85.HG003687.faa   proteome

The genome is translated with pyrodigal gene calls (single mode).  The
output is deterministic for fixed wheel versions.

usage: make_corpus.py <pyskani.whl> <pyhmmer.whl> <out.fasta>
"""
import gzip
import io
import sys
import zipfile

import pyrodigal


def read_fasta(text):
    name, chunks = None, []
    for line in text.splitlines():
        if line.startswith(">"):
            if name is not None:
                yield name, "".join(chunks)
            name, chunks = line[1:].split()[0], []
        elif line.strip():
            chunks.append(line.strip())
    if name is not None:
        yield name, "".join(chunks)


def main(skani_whl, hmmer_whl, out_path):
    with zipfile.ZipFile(skani_whl) as z:
        genome_text = gzip.decompress(z.read("pyskani/tests/e.coli-K12.fasta.gz")).decode()
    with zipfile.ZipFile(hmmer_whl) as z:
        proteome_text = z.read("pyhmmer/tests/data/seqs/938293.PRJEB85.HG003687.faa").decode()

    contigs = list(read_fasta(genome_text))
    finder = pyrodigal.GeneFinder()
    finder.train(*(seq.encode() for _, seq in contigs))

    out = io.StringIO()
    for name, seq in contigs:
        for i, gene in enumerate(finder.find_genes(seq.encode()), 1):
            prot = gene.translate().rstrip("*")
            out.write(f">ecoli_{name}_{i}\n")
            for k in range(0, len(prot), 60):
                out.write(prot[k:k + 60] + "\n")
    for name, seq in read_fasta(proteome_text):
        out.write(f">{name}\n")
        for k in range(0, len(seq), 60):
            out.write(seq[k:k + 60] + "\n")

    with open(out_path, "w") as f:
        f.write(out.getvalue())


if __name__ == "__main__":
    main(*sys.argv[1:4])
