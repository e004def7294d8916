def search():
    messages = ''
    historical_figure, msg = find_entity_or_value(entity_aliases = ['Saber'], relation_aliases = ['historical character', 'historical archetype'])
    messages += msg
    return messages
