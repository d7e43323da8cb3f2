"""Few-shot prompt construction for code generation and tree translation.

Both builders emit role-structured messages only; rendering chat-template
special tokens is left to the serving endpoint.  With k exemplar shots the
conversation is: one system turn, then k user/assistant pairs (the first user
turn carries the full task instructions, later ones a short connective), and
a final user turn with the target content.  With zero shots the instructions
and the target share a single user turn.
"""

from __future__ import annotations

import re
from typing import Sequence

from .exemplars import WorkedExample
from .llm import ChatMessage, ChatRequest

CODEGEN_SYSTEM = "You are a helpful assistant who **produces Prolog code** to solve problems."

_CODEGEN_INTRO = (
    "Could you please help me write Prolog code to solve the following "
    "{kind} reasoning problem? You should use consistent variable names for "
    "coreferent entities or attributes throughout the code. Start by coding "
    'the given context after the "/* Context */" comment. Then code the '
    'query that represents the question after the "/* Query */" comment. '
    "\n\n\n\nHere is the problem:\n\n{question}"
)

_FOLLOWUP = (
    "Excellent work! Here is another problem for you to solve. Please apply "
    "the same approach you used for the previous one(s) to tackle this new "
    "one. \nProblem:\n{question}"
)

_CODEGEN_REPLY = (
    "Sure! I am happy to help you write Prolog code to solve this {kind} "
    "reasoning problem. Here is the Prolog code:\n```prolog\n{code}\n```"
)

TRANSLATION_SYSTEM = "You are a helpful and smart assistant that helps people solve problems."

_TRANSLATION_INTRO = (
    "I need assistance in translating a reasoning tree generated by a Prolog "
    "engine into a natural language description. To facilitate this, I am "
    "providing the original problem, the relevant Prolog code, and the "
    "reasoning tree itself. Please review these carefully and provide a "
    "fluent and accurate narrative of the reasoning process. Thanks for your "
    "help!\n\n**Instructions Start**\n\nTranslate the provided reasoning "
    "tree into a clear and logical natural language explanation.\n\nMany "
    "thanks for your help! I am looking forward to your response!\n\n"
    "**Instructions End**\n\n\n\n{content}"
)

_TRANSLATION_FIRST_CONTENT = (
    "Here is the problem:\n\n{question}\n"
    "Here is the prolog_code:\n\n{code}\n"
    "Here is the prolog reasoning tree:\n\n{tree}"
)

_TRANSLATION_FOLLOWUP = (
    "Excellent work! Here is another problem for you to solve. Please apply "
    "the same approach you used for the previous one(s) to tackle this new "
    "one. \nProblem:\n{question}\n\nProlog code:\n{code}\n\n"
    "Prolog reasoning tree:\n{tree}"
)

_TRANSLATION_REPLY = (
    "Sure! I am happy to help you convert the Prolog-style reasoning tree "
    "into a natural language reasoning chain. Here is the reasoning chain:\n"
    "{translation}"
)


def _kind_word(task: str) -> str:
    return "logical" if task == "logic" else "arithmetic"


def build_codegen_prompt(question: str, task: str = "arithmetic",
                         shots: Sequence[WorkedExample] = (),
                         temperature: float | None = None,
                         top_p: float | None = None) -> ChatRequest:
    """Messages asking for a logic program solving ``question``."""
    kind = _kind_word(task)
    messages = [ChatMessage("system", CODEGEN_SYSTEM)]
    for i, shot in enumerate(shots):
        template = _CODEGEN_INTRO if i == 0 else _FOLLOWUP
        messages.append(ChatMessage("user", template.format(
            kind=_kind_word(shot.task), question=shot.question)))
        messages.append(ChatMessage("assistant", _CODEGEN_REPLY.format(
            kind=_kind_word(shot.task), code=shot.prolog)))
    template = _CODEGEN_INTRO if not shots else _FOLLOWUP
    messages.append(ChatMessage("user", template.format(kind=kind, question=question)))
    kwargs = {}
    if temperature is not None:
        kwargs["temperature"] = temperature
    if top_p is not None:
        kwargs["top_p"] = top_p
    return ChatRequest(tuple(messages), **kwargs)


def build_translation_prompt(question: str, prolog_source: str, tree_text: str,
                             shots: Sequence[WorkedExample] = (),
                             temperature: float | None = None,
                             top_p: float | None = None) -> ChatRequest:
    """Messages asking for a natural-language narration of a reasoning tree."""
    messages = [ChatMessage("system", TRANSLATION_SYSTEM)]
    for i, shot in enumerate(shots):
        if i == 0:
            content = _TRANSLATION_INTRO.format(content=_TRANSLATION_FIRST_CONTENT.format(
                question=shot.question, code=shot.prolog, tree=shot.tree))
        else:
            content = _TRANSLATION_FOLLOWUP.format(
                question=shot.question, code=shot.prolog, tree=shot.tree)
        messages.append(ChatMessage("user", content))
        messages.append(ChatMessage("assistant", _TRANSLATION_REPLY.format(
            translation=shot.translation)))
    if not shots:
        final = _TRANSLATION_INTRO.format(content=_TRANSLATION_FIRST_CONTENT.format(
            question=question, code=prolog_source, tree=tree_text))
    else:
        final = _TRANSLATION_FOLLOWUP.format(
            question=question, code=prolog_source, tree=tree_text)
    messages.append(ChatMessage("user", final))
    kwargs = {}
    if temperature is not None:
        kwargs["temperature"] = temperature
    if top_p is not None:
        kwargs["top_p"] = top_p
    return ChatRequest(tuple(messages), **kwargs)


_PROLOG_FENCE = re.compile(r"```prolog[ \t]*\n(.*?)```", re.DOTALL)


class NoProgramFound(ValueError):
    """The completion contained no ```prolog fenced block."""


def extract_program(response_text: str) -> str:
    """Content of the first ```prolog fenced block, fences stripped."""
    match = _PROLOG_FENCE.search(response_text)
    if match is None:
        raise NoProgramFound("response contains no ```prolog code block")
    return match.group(1).strip()
