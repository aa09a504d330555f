#!/usr/bin/env python3
"""Optional offline fine-tune of the triple-to-text verbalizer.

Fine-tunes a seq2seq checkpoint on a data-to-text corpus (WebNLG-style TSV:
`subject<TAB>predicate<TAB>object<TAB>sentence`) for a few epochs and saves
the result for the service's `verbalize` capability. Training is never on
the serving path; any compatible published checkpoint works equally well.

Usage:
  python scripts/train_verbalizer.py --data webnlg.tsv --out verbalizer/ \
      --base t5-base --epochs 5
"""

import argparse
import sys
from pathlib import Path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", required=True, help="TSV: s, p, o, target sentence")
    parser.add_argument("--out", required=True)
    parser.add_argument("--base", default="t5-base")
    parser.add_argument("--epochs", type=int, default=5)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--lr", type=float, default=3e-4)
    parser.add_argument(
        "--template", default="translate triple to text: {s} | {p} | {o}"
    )
    args = parser.parse_args()

    try:
        import torch
        from torch.utils.data import DataLoader, Dataset
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
    except ImportError as exc:
        print(f"training extras not installed ({exc}); pip install '.[models]'", file=sys.stderr)
        return 1

    rows = []
    for line in Path(args.data).read_text(encoding="utf-8").splitlines():
        parts = line.split("\t")
        if len(parts) == 4:
            rows.append(parts)
    if not rows:
        print("no usable rows in the training file", file=sys.stderr)
        return 1

    tokenizer = AutoTokenizer.from_pretrained(args.base)
    model = AutoModelForSeq2SeqLM.from_pretrained(args.base)

    class TripleText(Dataset):
        def __len__(self):
            return len(rows)

        def __getitem__(self, i):
            s, p, o, target = rows[i]
            source = args.template.format(s=s, p=p, o=o)
            enc = tokenizer(source, truncation=True, max_length=96, padding="max_length",
                            return_tensors="pt")
            dec = tokenizer(target, truncation=True, max_length=64, padding="max_length",
                            return_tensors="pt")
            labels = dec.input_ids.squeeze(0)
            labels[labels == tokenizer.pad_token_id] = -100
            return {
                "input_ids": enc.input_ids.squeeze(0),
                "attention_mask": enc.attention_mask.squeeze(0),
                "labels": labels,
            }

    loader = DataLoader(TripleText(), batch_size=args.batch_size, shuffle=True)
    optimizer = torch.optim.AdamW(model.parameters(), lr=args.lr)
    model.train()
    for epoch in range(args.epochs):
        total = 0.0
        for batch in loader:
            optimizer.zero_grad()
            loss = model(**batch).loss
            loss.backward()
            optimizer.step()
            total += loss.item()
        print(f"epoch {epoch + 1}/{args.epochs}: loss {total / len(loader):.4f}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    print(f"saved fine-tuned verbalizer to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
