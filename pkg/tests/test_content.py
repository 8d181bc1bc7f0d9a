from epolis.content import sample_map, sample_pack
from epolis.world import in_trigger


class TestSampleContent:
    def test_map_validates(self):
        cmap = sample_map()
        assert cmap.name == "plateia"
        assert (cmap.width_cells, cmap.height_cells) == (16, 16)

    def test_pack_validates_against_map(self):
        pack = sample_pack()
        assert pack.pack_id == "epolis-sample"
        assert pack.attributes == ("safety", "trust", "economy", "environment")
        assert pack.baseline == 50

    def test_four_dilemmas(self):
        assert [d.id for d in sample_pack().dilemmas] == ["Q1", "Q2", "Q3", "Q4"]

    def test_q1_is_the_square_incident(self):
        q1 = sample_pack().get("Q1")
        assert q1.prompt == "How would you react?"
        assert [c.key for c in q1.choices] == ["A", "B", "C", "D"]
        assert q1.choices[0].text == "Confront the police officers and stand up for the man"
        assert q1.choices[1].text == "Not confront the police officers, but video-record their actions"
        assert q1.choices[2].text == "Congratulate the police"
        assert q1.choices[3].text == "Leave; there is nothing to do here"

    def test_triggers_on_reachable_streets(self):
        cmap = sample_map()
        reachable = cmap.reachable_from_spawns()
        for spec in sample_pack().dilemmas:
            cell = cmap.cell_of(spec.trigger.x, spec.trigger.z)
            assert cmap.rows[cell[1]][cell[0]] == "."
            assert cell in reachable

    def test_spawn_not_inside_any_zone(self):
        # players should roam before their first dilemma
        cmap = sample_map()
        sx, sz = cmap.cell_center(*cmap.spawn_cells[0])
        assert all(not in_trigger((sx, sz), d.trigger) for d in sample_pack().dilemmas)
