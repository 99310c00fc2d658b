"""Asset lifecycle, locations, grouping, the type catalog, and bulk import."""

import pytest

from uuis import inventory
from uuis.errors import (
    Conflict,
    CrossUnitTransfer,
    DuplicateName,
    DuplicateRoom,
    DuplicateSerial,
    ImmutableField,
    InvalidState,
    LocationOccupied,
    MixedOwnership,
    NotFound,
    PermissionDenied,
    UnknownType,
    ValidationFailed,
)
from uuis.model import (
    AssetKind,
    AssetState,
    PermissionAction,
    ReturnCondition,
    ScopedPermission,
)


class TestAddAsset:
    def test_da_adds_asset_to_own_department(self, campus):
        asset = campus.store.transact(lambda txn: inventory.add_asset(
            txn, campus.user("da1").id, "SN-100", "laptop", campus.unit("d1").id,
            campus.locations["h801"].id, {"ram": "16GB"}))
        assert asset.state is AssetState.AVAILABLE
        assert asset.owner_unit_id == campus.unit("d1").id

    def test_unknown_type_points_at_exception_requests(self, campus):
        with pytest.raises(UnknownType):
            campus.store.transact(lambda txn: inventory.add_asset(
                txn, campus.user("da1").id, "SN-101", "hovercraft",
                campus.unit("d1").id))

    def test_faculty_admin_adds_into_child_department(self, campus):
        asset = campus.store.transact(lambda txn: inventory.add_asset(
            txn, campus.user("fa1").id, "SN-102", "laptop", campus.unit("d2").id))
        assert asset.owner_unit_id == campus.unit("d2").id

    def test_da_denied_outside_own_department(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.add_asset(
                txn, campus.user("da1").id, "SN-103", "laptop", campus.unit("d2").id))

    def test_duplicate_serial(self, campus):
        with pytest.raises(DuplicateSerial):
            campus.store.transact(lambda txn: inventory.add_asset(
                txn, campus.user("da1").id, "SN-DELL-1", "laptop",
                campus.unit("d1").id))

    def test_faculty_owned_assets_are_allowed(self, campus):
        asset = campus.store.transact(lambda txn: inventory.add_asset(
            txn, campus.user("fa1").id, "SN-FAC", "projector", campus.unit("f1").id))
        assert asset.owner_unit_id == campus.unit("f1").id


class TestModifyAsset:
    def test_property_change_keeps_everything_else(self, campus):
        asset = campus.store.transact(lambda txn: inventory.modify_asset(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            {"properties": {"make": "Dell", "ram": "32GB"}}))
        assert asset.properties["ram"] == "32GB"
        assert asset.id == campus.assets["dell1"].id
        assert asset.serial_number == "SN-DELL-1"

    def test_id_is_immutable(self, campus):
        with pytest.raises(ImmutableField):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                {"id": "ast-999999"}))

    def test_state_is_not_directly_editable(self, campus):
        with pytest.raises(ValidationFailed):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                {"state": "damaged"}))

    def test_out_of_inventory_rejects_modification(self, campus):
        import dataclasses

        def retire(txn):
            txn.put("assets", dataclasses.replace(
                txn.assets.require(campus.assets["dell1"].id),
                state=AssetState.OUT_OF_INVENTORY))

        campus.store.transact(retire)
        with pytest.raises(InvalidState):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                {"properties": {}}))

    def test_insufficient_privileges(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da2").id, campus.assets["dell1"].id,
                {"properties": {}}))

    def test_no_asset_found(self, campus):
        with pytest.raises(NotFound):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da1").id, "ast-404404", {"properties": {}}))

    def test_serial_change_keeps_uniqueness(self, campus):
        with pytest.raises(DuplicateSerial):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                {"serial_number": "SN-DELL-2"}))
        renamed = campus.store.transact(lambda txn: inventory.modify_asset(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            {"serial_number": "SN-DELL-1b"}))
        assert renamed.serial_number == "SN-DELL-1b"

    def test_rehoming_needs_authority_over_both_units(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.modify_asset(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                {"owner_unit_id": campus.unit("d2").id}))
        moved = campus.store.transact(lambda txn: inventory.modify_asset(
            txn, campus.user("fa1").id, campus.assets["dell1"].id,
            {"owner_unit_id": campus.unit("d2").id}))
        assert moved.owner_unit_id == campus.unit("d2").id

    def test_audit_records_before_and_after(self, campus):
        campus.store.transact(lambda txn: inventory.modify_asset(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            {"properties": {"make": "Dell", "ram": "64GB"}}))
        record = [r for r in campus.view().audit if r.action == "asset.edit"][-1]
        assert record.before["properties"]["ram"] == "8GB"
        assert record.after["properties"]["ram"] == "64GB"


class TestTransferDirect:
    def test_same_department_move_creates_no_request(self, campus):
        requests_before = len(campus.view().requests)
        asset = campus.store.transact(lambda txn: inventory.transfer_direct(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            campus.locations["h802"].id))
        assert asset.location_id == campus.locations["h802"].id
        assert len(campus.view().requests) == requests_before

    def test_cross_unit_target_is_refused(self, campus):
        with pytest.raises(CrossUnitTransfer):
            campus.store.transact(lambda txn: inventory.transfer_direct(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                campus.locations["h803"].id))

    def test_permission_required(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.transfer_direct(
                txn, campus.user("stu1").id, campus.assets["dell1"].id,
                campus.locations["h802"].id))

    def test_direct_move_never_changes_owner(self, campus):
        before = campus.view().assets.require(campus.assets["dell1"].id).owner_unit_id
        campus.store.transact(lambda txn: inventory.transfer_direct(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            campus.locations["h802"].id, campus.user("stu1").id))
        after = campus.view().assets.require(campus.assets["dell1"].id)
        assert after.owner_unit_id == before
        assert after.state is AssetState.BORROWED
        assert after.holder_user_id == campus.user("stu1").id


class TestReturnAsset:
    def borrow(self, campus):
        campus.store.transact(lambda txn: inventory.transfer_direct(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            campus.locations["h801"].id, campus.user("stu1").id))

    def test_ok_return_goes_back_to_available(self, campus):
        self.borrow(campus)
        asset = campus.store.transact(lambda txn: inventory.return_asset(
            txn, campus.user("da1").id, campus.assets["dell1"].id, ReturnCondition.OK))
        assert asset.state is AssetState.AVAILABLE
        assert asset.holder_user_id is None

    def test_damaged_return(self, campus):
        self.borrow(campus)
        asset = campus.store.transact(lambda txn: inventory.return_asset(
            txn, campus.user("da1").id, campus.assets["dell1"].id,
            ReturnCondition.DAMAGED))
        assert asset.state is AssetState.DAMAGED
        assert asset.holder_user_id is None

    def test_returning_an_available_asset_is_invalid(self, campus):
        with pytest.raises(InvalidState):
            campus.store.transact(lambda txn: inventory.return_asset(
                txn, campus.user("da1").id, campus.assets["dell1"].id,
                ReturnCondition.OK))


class TestLocations:
    def test_it_creates_locations(self, campus):
        location = campus.store.transact(lambda txn: inventory.create_location(
            txn, campus.user("it").id, "H", "9", "901", campus.unit("d1").id, 30))
        assert location.room_key == ("H", "9", "901")

    def test_level1_cannot_create_locations(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.create_location(
                txn, campus.user("da1").id, "H", "9", "902", campus.unit("d1").id))

    def test_duplicate_room_triple(self, campus):
        with pytest.raises(DuplicateRoom):
            campus.store.transact(lambda txn: inventory.create_location(
                txn, campus.user("it").id, "H", "8", "801", campus.unit("d2").id))

    def test_delete_occupied_room_refused(self, campus):
        with pytest.raises(LocationOccupied):
            campus.store.transact(lambda txn: inventory.delete_location(
                txn, campus.user("da1").id, campus.locations["h801"].id))

    def test_delete_empty_room(self, campus):
        empty = campus.store.transact(lambda txn: inventory.create_location(
            txn, campus.user("it").id, "H", "9", "999", campus.unit("d1").id))
        campus.store.transact(lambda txn: inventory.delete_location(
            txn, campus.user("da1").id, empty.id))
        assert empty.id not in campus.view().locations

    def test_structural_edits_are_it_only(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.edit_location(
                txn, campus.user("da1").id, campus.locations["h801"].id,
                {"floor": "9"}))
        moved = campus.store.transact(lambda txn: inventory.edit_location(
            txn, campus.user("it").id, campus.locations["h801"].id, {"floor": "9"}))
        assert moved.floor == "9"

    def test_capacity_edit_needs_location_edit_scope(self, campus):
        updated = campus.store.transact(lambda txn: inventory.edit_location(
            txn, campus.user("da1").id, campus.locations["h801"].id,
            {"capacity": 42}))
        assert updated.capacity == 42
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.edit_location(
                txn, campus.user("da2").id, campus.locations["h801"].id,
                {"capacity": 13}))


class TestGroups:
    def test_group_and_ungroup(self, campus):
        group = campus.store.transact(lambda txn: inventory.group_assets(
            txn, campus.user("da1").id, "tower+monitor",
            [campus.assets["dell1"].id, campus.assets["dell2"].id]))
        assert campus.view().assets.require(campus.assets["dell1"].id).group_id == group.id
        campus.store.transact(lambda txn: inventory.ungroup(
            txn, campus.user("da1").id, group.id))
        assert campus.view().assets.require(campus.assets["dell1"].id).group_id is None

    def test_mixed_ownership_refused(self, campus):
        with pytest.raises(MixedOwnership):
            campus.store.transact(lambda txn: inventory.group_assets(
                txn, campus.user("fa1").id, "frankengroup",
                [campus.assets["dell1"].id, campus.assets["prj"].id]))

    def test_asset_cannot_join_two_groups(self, campus):
        campus.store.transact(lambda txn: inventory.group_assets(
            txn, campus.user("da1").id, "one", [campus.assets["dell1"].id]))
        with pytest.raises(Conflict):
            campus.store.transact(lambda txn: inventory.group_assets(
                txn, campus.user("da1").id, "two", [campus.assets["dell1"].id]))


class TestAssetTypes:
    def test_it_defines_new_type(self, campus):
        type_def = campus.store.transact(lambda txn: inventory.define_asset_type(
            txn, campus.user("it").id, "3d-printer", AssetKind.OTHER,
            ["nozzle", "volume"]))
        assert type_def.common_properties == ("nozzle", "volume")

    def test_duplicate_type_name(self, campus):
        with pytest.raises(DuplicateName):
            campus.store.transact(lambda txn: inventory.define_asset_type(
                txn, campus.user("it").id, "laptop", AssetKind.OTHER))

    def test_level1_cannot_define_types(self, campus):
        with pytest.raises(PermissionDenied):
            campus.store.transact(lambda txn: inventory.define_asset_type(
                txn, campus.user("da1").id, "kiln", AssetKind.OTHER))


def bulk_csv(rows, props=("make",)):
    header = "serial_number,type,owner_unit,building,floor,room"
    if props:
        header += "," + ",".join(f"prop:{p}" for p in props)
    return ("\n".join([header] + rows) + "\n").encode("utf-8")


class TestBulkImport:
    def run(self, campus, data, actor="it"):
        return campus.store.transact(lambda txn: inventory.bulk_import(
            txn, campus.user(actor).id, data))

    def test_three_valid_rows_create_three_assets(self, campus):
        data = bulk_csv([
            "SN-B1,laptop,Chemistry,H,8,801,Dell",
            "SN-B2,laptop,Chemistry,H,8,802,Dell",
            "SN-B3,projector,Physics,H,8,803,",
        ])
        result = self.run(campus, data)
        assert result == {"created": 3, "updated": 0, "errors": []}
        assert inventory.find_asset_by_serial(campus.view(), "SN-B2") is not None

    def test_invalid_row_aborts_everything(self, campus):
        before = campus.store.export_bytes()
        data = bulk_csv([
            "SN-B1,laptop,Chemistry,H,8,801,Dell",
            "SN-B2,hovercraft,Chemistry,H,8,802,Dell",
            "SN-B3,laptop,Chemistry,H,8,801,Dell",
        ])
        with pytest.raises(ValidationFailed) as excinfo:
            self.run(campus, data)
        assert excinfo.value.rows == [
            {"row": 2, "column": "type", "reason": "unknown type 'hovercraft'"}]
        assert campus.store.export_bytes() == before

    def test_per_row_oracle_agreement(self, campus):
        """Each row's validity assessed independently equals the batch verdict."""
        rows = [
            ("SN-OK-1,laptop,Chemistry,H,8,801,", True),
            ("SN-OK-1,laptop,Chemistry,H,8,801,", False),   # repeats in-file
            (",laptop,Chemistry,H,8,801,", False),          # missing serial
            ("SN-OK-2,laptop,Nowhere,H,8,801,", False),     # unknown unit
            ("SN-OK-3,laptop,Chemistry,H,9,999,", False),   # unknown room
            ("SN-OK-4,laptop,Chemistry,,,,", True),         # no location at all
            ("SN-OK-5,laptop,Acme Surplus,H,8,801,", False),  # external owner
        ]
        data = bulk_csv([r for r, _ in rows])
        with pytest.raises(ValidationFailed) as excinfo:
            self.run(campus, data)
        bad_rows = {e["row"] for e in excinfo.value.rows}
        expected_bad = {i + 1 for i, (_, ok) in enumerate(rows) if not ok}
        assert bad_rows == expected_bad

    def test_empty_file_is_a_row_zero_error(self, campus):
        data = bulk_csv([])
        with pytest.raises(ValidationFailed) as excinfo:
            self.run(campus, data)
        assert excinfo.value.rows[0]["row"] == 0
        assert "no data rows" in excinfo.value.rows[0]["reason"]

    def test_wrong_header_is_rejected(self, campus):
        data = b"serial,kind\nSN-1,laptop\n"
        with pytest.raises(ValidationFailed) as excinfo:
            self.run(campus, data)
        assert excinfo.value.rows[0]["row"] == 0

    def test_existing_serial_becomes_an_update(self, campus):
        data = bulk_csv(["SN-DELL-1,laptop,Chemistry,H,8,802,Lenovo"])
        result = self.run(campus, data)
        assert result["created"] == 0 and result["updated"] == 1
        asset = inventory.find_asset_by_serial(campus.view(), "SN-DELL-1")
        assert asset.id == campus.assets["dell1"].id  # same asset, not a clone
        assert asset.properties == {"make": "Lenovo"}
        assert asset.location_id == campus.locations["h802"].id

    def test_update_rows_respect_permissions(self, campus):
        # da2 cannot edit a d1-owned asset via import
        data = bulk_csv(["SN-DELL-1,laptop,Chemistry,H,8,801,Dell"])
        with pytest.raises(ValidationFailed) as excinfo:
            self.run(campus, data, actor="da2")
        assert "permission denied" in excinfo.value.rows[0]["reason"]

    def test_create_rows_respect_permissions(self, campus):
        data = bulk_csv(["SN-NEW-D2,laptop,Physics,,,,"])
        with pytest.raises(ValidationFailed):
            self.run(campus, data, actor="da1")
        result = self.run(campus, data, actor="da2")
        assert result["created"] == 1

    def test_rfc4180_quoting(self, campus):
        data = bulk_csv(['"SN-Q,1",laptop,Chemistry,H,8,801,"15\'\' screen, glossy"'])
        result = self.run(campus, data)
        assert result["created"] == 1
        asset = inventory.find_asset_by_serial(campus.view(), "SN-Q,1")
        assert asset.properties["make"] == "15'' screen, glossy"

    def test_blank_lines_are_ignored(self, campus):
        raw = bulk_csv(["SN-BL-1,laptop,Chemistry,,,,"]).decode()
        data = raw.replace("\n", "\n\n").encode()
        result = self.run(campus, data)
        assert result["created"] == 1

    def test_audit_emits_row_records_plus_summary(self, campus):
        before = max((r.seq for r in campus.view().audit), default=0)
        data = bulk_csv([
            "SN-A1,laptop,Chemistry,,,,",
            "SN-A2,laptop,Chemistry,,,,",
            "SN-A3,laptop,Chemistry,,,,",
        ])
        self.run(campus, data)
        new = [r for r in campus.view().audit if r.seq > before]
        assert len(new) == 4
        assert [r.action for r in new].count("asset.create") == 3
        assert new[-1].action == "asset.bulk_import"
        assert new[-1].after == {"created": 3, "updated": 0, "rows": 3}

    def test_row_cap(self, campus):
        rows = [f"SN-CAP-{i},laptop,Chemistry,,,," for i in range(10_001)]
        with pytest.raises(ValidationFailed) as excinfo:
            self.run(campus, bulk_csv(rows))
        assert "10000" in excinfo.value.rows[0]["reason"]
