"""
Sink Factory - Crea sink da configurazione
Pattern Factory per instanziare sink dal nome diretto della classe.
Fail-fast: solleva eccezioni se la configurazione non è valida.

Le classi vengono risolte dinamicamente dal modulo adapters.output
usando getattr(), senza registry esplicito.
"""

import logging

from .ports import SinkPort

logger = logging.getLogger(__name__)


class SinkFactory:
    """
    Factory per creare sink da configurazione.
    """

    @classmethod
    def create_sink(cls, class_name: str, config: dict) -> SinkPort:
        """
        Crea un sink dalla configurazione.

        Args:
            class_name: Nome della classe (es: "JsonReportSink")
            config: Configurazione specifica del sink

        Returns:
            Istanza di SinkPort

        Raises:
            ValueError: Se la classe non esiste nel modulo
            RuntimeError: Se la creazione fallisce
        """
        try:
            import adapters.output as output_module

            if not hasattr(output_module, class_name):
                available = ', '.join(output_module.__all__)
                logger.error(f"❌ Unknown sink class: '{class_name}'")
                logger.info(f"Available classes: {available}")
                raise ValueError(
                    f"Unknown sink class '{class_name}'. "
                    f"Available: {available}"
                )

            sink_class = getattr(output_module, class_name)

            if not issubclass(sink_class, SinkPort):
                raise ValueError(f"{class_name} must extend SinkPort")

            sink = sink_class(name=class_name, config=config)
            logger.info(f"✅ Created sink: {sink.name}")
            return sink

        except ValueError:
            raise
        except Exception as e:
            logger.error(f"❌ Failed to create sink '{class_name}': {e}", exc_info=True)
            raise RuntimeError(f"Sink creation failed: {class_name}") from e

    @classmethod
    def get_available_classes(cls) -> list:
        import adapters.output as output_module

        return list(output_module.__all__)
