import pytest


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A miniature randomly-initialized BERT checkpoint on disk.

    Built locally so the suite needs no network or model download; the
    service code path (load -> tokenize -> forward -> pool -> normalize)
    is identical to a full-size pretrained checkpoint.
    """
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    d = tmp_path_factory.mktemp("tiny-bert")
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + list("abcdefghijklmnopqrstuvwxyz")
        + ["hello", "world", "sort", "list", "python", "file", "##s", "##ing"]
    )
    (d / "vocab.txt").write_text("\n".join(vocab), encoding="utf-8")
    tokenizer = BertTokenizer(vocab_file=str(d / "vocab.txt"))
    tokenizer.save_pretrained(str(d))

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    BertModel(config).save_pretrained(str(d))
    return str(d)
