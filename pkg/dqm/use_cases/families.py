from typing import List
from dqm.core.result import Result
from dqm.domain.errors import DqmError
from dqm.families.catalog import FamilyCatalog, default_catalog
from dqm.infrastructure.computation_context import ComputationContext
from dqm.infrastructure.uow import UnitOfWork


class ListFamilies(UnitOfWork[List[dict], DqmError]):
    def __init__(self, catalog: FamilyCatalog | None = None):
        super().__init__()
        self._catalog = catalog or default_catalog()

    def execute(self) -> Result[List[dict], DqmError]:
        def use_case(ctx: ComputationContext) -> Result[List[dict], DqmError]:
            rows = [{**info, "status": "implemented"} for info in self._catalog.catalog_list()]
            rows += [{**stub.to_dict(), "finite": None, "status": "xi formula only"} for stub in self._catalog.stubs()]
            return Result.ok(rows)
        return self._run(use_case)


class ExportCatalog(UnitOfWork[str, DqmError]):
    def __init__(self, catalog: FamilyCatalog | None = None):
        super().__init__()
        self._catalog = catalog or default_catalog()

    def execute(self) -> Result[str, DqmError]:
        return self._run(lambda ctx: Result.ok(self._catalog.export_catalog()))
