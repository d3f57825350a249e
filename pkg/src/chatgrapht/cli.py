"""Command-line entrypoint: run the session service."""

from __future__ import annotations

from pathlib import Path

import click

from .gateway import (
    MockScript,
    OpenAIChatGateway,
    ProviderConfig,
    RecordingGateway,
    ReplayGateway,
    ScriptedGateway,
)
from .orchestrator import InterventionPolicy, ModelSettings
from .service import ServiceConfig, create_app


@click.command()
@click.option("--port", default=8400, show_default=True, help="HTTP port to listen on.")
@click.option(
    "--provider",
    type=click.Choice(["real", "mock", "replay"]),
    default="mock",
    show_default=True,
    help="LLM backend: real provider, scripted mock, or recorded replay.",
)
@click.option("--mock-script", type=click.Path(exists=True), default=None,
              help="JSON mock script for --provider mock.")
@click.option("--record", type=click.Path(), default=None,
              help="Record (fingerprint, reply) pairs to this file.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Provider config JSON (base_url, model, api_key_env, ...).")
@click.option("--cooldown", default=3, show_default=True,
              help="Human actions required between Meta Agent interventions.")
@click.option("--relevance-threshold", default=0.5, show_default=True,
              help="Minimum self-rated relevance for an intervention to surface.")
@click.option("--auto-respond-to-inserted", is_flag=True, default=False,
              help="Respond to Meta-inserted prompts without user confirmation.")
@click.option("--data-dir", type=click.Path(), default="./chatgrapht-data",
              show_default=True, help="Directory for graph documents and event logs.")
def main(port, provider, mock_script, record, config_path, cooldown,
         relevance_threshold, auto_respond_to_inserted, data_dir):
    """Run the conversation-graph session service."""
    provider_config = (
        ProviderConfig.from_file(config_path) if config_path else ProviderConfig()
    )

    def gateway_factory():
        if provider == "mock":
            script = MockScript.from_file(mock_script) if mock_script else MockScript()
            gw = ScriptedGateway(script)
        elif provider == "replay":
            if not record:
                raise click.UsageError("--provider replay requires --record <store>")
            return ReplayGateway(record)
        else:
            gw = OpenAIChatGateway(provider_config)
        if record and provider != "replay":
            gw = RecordingGateway(gw, record)
        return gw

    config = ServiceConfig(
        gateway_factory=gateway_factory,
        policy=InterventionPolicy(
            cooldown_actions=cooldown,
            relevance_threshold=relevance_threshold,
            auto_respond_to_inserted=auto_respond_to_inserted,
        ),
        model=ModelSettings(
            model=provider_config.model,
            temperature=provider_config.temperature,
            max_tokens=provider_config.max_tokens,
        ),
        data_dir=Path(data_dir),
        gateway_mode=provider,
    )
    app = create_app(config)

    import uvicorn

    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
