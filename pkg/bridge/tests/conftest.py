import json

import pytest
import torch
from tokenizers import Tokenizer, models as tok_models, pre_tokenizers
from tokenizers.processors import TemplateProcessing
from transformers import (
    BertConfig,
    BertModel,
    GPT2Config,
    GPT2LMHeadModel,
    PreTrainedTokenizerFast,
)

from lmbridge.config import load_config
from lmbridge.models import load_slots
from lmbridge.server import create_app

WORDS = (
    "the a cat sat on mat dog runs fast slow news tool reads articles it "
    "answers questions about them quickly users ask daily search engine "
    "medical doctors query translation speech real time summaries managers"
).split()

VOCAB = {"<unk>": 0, "<s>": 1, "</s>": 2, "<pad>": 3, "[CLS]": 4, "[SEP]": 5}
for word in WORDS:
    VOCAB.setdefault(word, len(VOCAB))


def _base_tokenizer() -> Tokenizer:
    tok = Tokenizer(tok_models.WordLevel(dict(VOCAB), unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    return tok


def _save_causal_tokenizer(path) -> None:
    fast = PreTrainedTokenizerFast(
        tokenizer_object=_base_tokenizer(),
        unk_token="<unk>", bos_token="<s>", eos_token="</s>", pad_token="<pad>",
    )
    fast.save_pretrained(path)


def _save_encoder_tokenizer(path) -> None:
    tok = _base_tokenizer()
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", VOCAB["[CLS]"]), ("[SEP]", VOCAB["[SEP]"])],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="<unk>", pad_token="<pad>", cls_token="[CLS]", sep_token="[SEP]",
    )
    fast.save_pretrained(path)


def _save_causal_model(path, seed: int) -> None:
    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=len(VOCAB), n_positions=32, n_embd=16, n_layer=2, n_head=2,
        bos_token_id=VOCAB["<s>"], eos_token_id=VOCAB["</s>"],
    )
    GPT2LMHeadModel(config).save_pretrained(path)


def _save_encoder_model(path, seed: int) -> None:
    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(VOCAB), hidden_size=16, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=32, max_position_embeddings=32,
        pad_token_id=VOCAB["<pad>"],
    )
    BertModel(config).save_pretrained(path)


@pytest.fixture(scope="session")
def checkpoints(tmp_path_factory):
    root = tmp_path_factory.mktemp("checkpoints")
    academic = root / "academic"
    general = root / "general"
    embedder = root / "embedder"
    for path, seed in ((academic, 11), (general, 22)):
        _save_causal_model(path, seed)
        _save_causal_tokenizer(path)
    _save_encoder_model(embedder, 33)
    _save_encoder_tokenizer(embedder)
    config = root / "bridge.json"
    config.write_text(json.dumps({
        "slots": [
            {"name": "academic", "path": str(academic), "role": "causal_lm"},
            {"name": "general", "path": str(general), "role": "causal_lm"},
            {"name": "embedder", "path": str(embedder), "role": "encoder",
             "embedding_layer": -1},
        ]
    }))
    return config


@pytest.fixture(scope="session")
def slots(checkpoints):
    return load_slots(load_config(checkpoints))


@pytest.fixture(scope="session")
def app(slots):
    return create_app(slots)


@pytest.fixture(scope="session")
def client(app):
    from fastapi.testclient import TestClient

    with TestClient(app) as c:
        yield c
